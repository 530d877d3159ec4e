#include "minmet/report.hpp"

#include <chrono>
#include <fstream>
#include <future>
#include <sstream>

#include "minmet/certifier.hpp"
#include "minmet/coarse.hpp"
#include "minmet/constructions.hpp"
#include "minmet/oneparam.hpp"

namespace minmet {

using nlohmann::json;

namespace {

[[noreturn]] void config_fail(const std::string& path, const std::string& why) {
  throw ConfigError("config: " + path + ": " + why);
}

const json& require_field(const json& j, const std::string& path, const std::string& key) {
  if (!j.is_object()) config_fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) config_fail(path + "." + key, "missing");
  return *it;
}

template <typename T>
T field_as(const json& j, const std::string& path, const std::string& key) {
  try {
    return require_field(j, path, key).get<T>();
  } catch (const json::exception& e) {
    config_fail(path + "." + key, e.what());
  }
}

template <typename T>
T field_or(const json& j, const std::string& path, const std::string& key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    config_fail(path + "." + key, e.what());
  }
}

Group group_from_json(const json& j) {
  const std::string kind = field_as<std::string>(j, "group", "kind");
  if (kind == "unitary") {
    const int n = field_as<int>(j, "group", "n");
    return field_or<bool>(j, "group", "diagonal", false) ? Group::unitary_diagonal(n)
                                                         : Group::unitary(n);
  }
  if (kind == "special_orthogonal") return Group::special_orthogonal(field_as<int>(j, "group", "n"));
  if (kind == "general_linear") return Group::general_linear(field_as<int>(j, "group", "n"));
  if (kind == "heisenberg") return Group::heisenberg(field_or<int>(j, "group", "n", 3));
  if (kind == "free_group") return Group::free_group(field_as<int>(j, "group", "rank"));
  if (kind == "integer_lattice") return Group::integer_lattice(field_as<int>(j, "group", "dim"));
  if (kind == "finite_table") {
    const std::string table = field_as<std::string>(j, "group", "table");
    if (table == "cyclic") return Group::finite_table(cyclic_table(field_as<int>(j, "group", "m")));
    if (table == "dihedral") {
      return Group::finite_table(dihedral_table(field_as<int>(j, "group", "m")));
    }
    if (table == "symmetric3") return Group::finite_table(symmetric3_table());
    config_fail("group.table", "unknown table builder '" + table + "'");
  }
  if (kind == "finite_cyclic_tower") {
    return Group::finite_cyclic_tower(field_as<std::int64_t>(j, "group", "p"),
                                      field_as<int>(j, "group", "depth"));
  }
  if (kind == "finite_product_of_involutions") {
    return Group::finite_product_of_involutions(field_as<int>(j, "group", "depth"));
  }
  config_fail("group.kind", "unknown kind '" + kind + "'");
}

Filtration filtration_from_json(const Group& ctx, const json& j, const std::string& path);
std::shared_ptr<FiniteUniverse> universe_from_json(const Group& ctx, const json& j,
                                                   const std::string& path);

Element element_from_json_at(const Group& ctx, const json& j, const std::string& path) {
  try {
    return element_from_json(ctx, j);
  } catch (const json::exception& e) {
    config_fail(path, e.what());
  } catch (const std::invalid_argument& e) {
    config_fail(path, e.what());
  }
}

Filtration filtration_from_json(const Group& ctx, const json& j, const std::string& path) {
  const std::string type = field_as<std::string>(j, path, "type");
  if (type == "interval") {
    return interval_filtration_z(field_as<int>(j, path, "base"),
                                 field_as<int>(j, path, "n_min"),
                                 field_as<int>(j, path, "n_max"));
  }
  if (type == "subgroup") return subgroup_filtration(ctx);
  if (type == "explicit") {
    const std::string law_name = field_as<std::string>(j, path, "law");
    FiltrationLaw law;
    if (law_name == "cubes") {
      law = FiltrationLaw::birkhoff_cubes;
    } else if (law_name == "squares") {
      law = FiltrationLaw::kakutani_squares;
    } else {
      config_fail(path + ".law", "expected 'cubes' or 'squares'");
    }
    const json& levels = require_field(j, path, "levels");
    if (!levels.is_array()) config_fail(path + ".levels", "expected an array");
    std::vector<std::pair<double, std::vector<Element>>> parsed;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const std::string lp = path + ".levels[" + std::to_string(i) + "]";
      const double weight = field_as<double>(levels[i], lp, "weight");
      const json& elems = require_field(levels[i], lp, "elements");
      if (!elems.is_array()) config_fail(lp + ".elements", "expected an array");
      std::vector<Element> list;
      for (std::size_t e = 0; e < elems.size(); ++e) {
        list.push_back(element_from_json_at(ctx, elems[e],
                                            lp + ".elements[" + std::to_string(e) + "]"));
      }
      parsed.emplace_back(weight, std::move(list));
    }
    try {
      return explicit_filtration(law, std::move(parsed));
    } catch (const FiltrationError& e) {
      config_fail(path, e.what());
    }
  }
  config_fail(path + ".type", "unknown filtration type '" + type + "'");
}

std::shared_ptr<FiniteUniverse> universe_from_json(const Group& ctx, const json& j,
                                                   const std::string& path) {
  const std::string type = field_as<std::string>(j, path, "type");
  if (type == "whole") {
    return std::make_shared<FiniteUniverse>(FiniteUniverse::enumerate(ctx));
  }
  if (type == "interval") {
    if (ctx.kind != GroupKind::integer_lattice || ctx.dim != 1) {
      config_fail(path, "interval universes need a one-dimensional integer_lattice");
    }
    const std::int64_t radius = field_as<std::int64_t>(j, path, "radius");
    std::vector<Element> elems;
    for (std::int64_t x = -radius; x <= radius; ++x) elems.push_back(Element{Residues{{x}}});
    return std::make_shared<FiniteUniverse>(FiniteUniverse::from_elements(ctx, std::move(elems)));
  }
  if (type == "elements") {
    const json& elems = require_field(j, path, "elements");
    std::vector<Element> list;
    for (std::size_t e = 0; e < elems.size(); ++e) {
      list.push_back(
          element_from_json_at(ctx, elems[e], path + ".elements[" + std::to_string(e) + "]"));
    }
    return std::make_shared<FiniteUniverse>(FiniteUniverse::from_elements(ctx, std::move(list)));
  }
  config_fail(path + ".type", "unknown universe type '" + type + "'");
}

Metric metric_from_json(const Group& ctx, const json& j, const std::string& path) {
  const std::string type = field_as<std::string>(j, path, "type");
  try {
    if (type == "native") return native_metric(ctx);
    if (type == "euclidean") {
      return euclidean_metric(ctx, field_as<double>(j, path, "scale"));
    }
    if (type == "length_table") {
      return from_length_table(ctx, field_as<std::vector<double>>(j, path, "lengths"));
    }
    if (type == "birkhoff" || type == "kakutani") {
      Filtration f = filtration_from_json(ctx, require_field(j, path, "filtration"),
                                          path + ".filtration");
      std::shared_ptr<FiniteUniverse> u;
      if (j.contains("universe")) {
        u = universe_from_json(ctx, j.at("universe"), path + ".universe");
      }
      return type == "birkhoff" ? birkhoff_metric(ctx, f, u.get())
                                : kakutani_metric(ctx, f, u.get());
    }
    if (type == "sqrt") {
      return transform_sqrt(metric_from_json(ctx, require_field(j, path, "base"), path + ".base"));
    }
    if (type == "cap") {
      return transform_cap(metric_from_json(ctx, require_field(j, path, "base"), path + ".base"),
                           field_as<double>(j, path, "cap"));
    }
    if (type == "bi_invariantised") {
      return bi_invariantize(
          ctx, metric_from_json(ctx, require_field(j, path, "base"), path + ".base"),
          field_as<double>(j, path, "cap"), field_or<int>(j, path, "budget", 4096),
          field_or<std::uint64_t>(j, path, "seed", 1));
    }
    if (type == "word") {
      const json& gens = require_field(j, path, "generators");
      std::vector<Element> generators;
      for (std::size_t e = 0; e < gens.size(); ++e) {
        generators.push_back(element_from_json_at(
            ctx, gens[e], path + ".generators[" + std::to_string(e) + "]"));
      }
      GeneratingSet v = GeneratingSet::explicit_set(ctx, generators);
      Metric m;
      m.name = "word";
      m.provenance = Provenance::word;
      if (ctx.finite()) {
        auto u = std::make_shared<FiniteUniverse>(FiniteUniverse::enumerate(ctx));
        std::vector<int> indices;
        for (const auto& g : v.elements) {
          const int idx = u->find(g);
          if (idx < 0) config_fail(path + ".generators", "generator outside the group");
          indices.push_back(idx);
        }
        auto lengths =
            std::make_shared<std::vector<std::int64_t>>(word_metric_table(*u, indices));
        m.bounded = true;
        m.eval = [u, lengths](const Element& a, const Element& b) {
          const int idx = u->find(u->group.multiply(u->group.inverse(b), a));
          if (idx < 0) throw std::domain_error("word metric: element outside the group");
          const std::int64_t len = (*lengths)[static_cast<std::size_t>(idx)];
          if (len < 0) throw std::domain_error("word metric: element not generated");
          return static_cast<double>(len);
        };
        return m;
      }
      const auto node_cap = field_or<std::int64_t>(j, path, "node_cap", 1 << 20);
      Group owned = ctx;
      m.eval = [owned, v, node_cap](const Element& a, const Element& b) {
        const WordDistance r = word_metric(owned, v, a, b, node_cap);
        if (!r.value) throw std::domain_error("word metric: search budget exhausted");
        return static_cast<double>(*r.value);
      };
      return m;
    }
    if (type == "path") {
      if (ctx.finite()) {
        auto u = std::make_shared<FiniteUniverse>(FiniteUniverse::enumerate(ctx));
        const json& gens = require_field(j, path, "generators");
        std::vector<int> indices;
        for (std::size_t e = 0; e < gens.size(); ++e) {
          const Element g = element_from_json_at(
              ctx, gens[e], path + ".generators[" + std::to_string(e) + "]");
          const int idx = u->find(g);
          if (idx < 0) config_fail(path + ".generators", "generator outside the group");
          indices.push_back(idx);
        }
        Metric base = metric_from_json(ctx, require_field(j, path, "base"), path + ".base");
        return path_metric_finite(*u, base, indices);
      }
      Metric base = metric_from_json(ctx, require_field(j, path, "base"), path + ".base");
      return path_metric_sampled(ctx, base, field_as<double>(j, path, "ball_radius"),
                                 field_or<int>(j, path, "nodes", 96),
                                 field_or<std::uint64_t>(j, path, "seed", 1));
    }
  } catch (const NoCanonicalMetric& e) {
    config_fail(path, e.what());
  } catch (const FiltrationError& e) {
    config_fail(path, e.what());
  } catch (const std::invalid_argument& e) {
    config_fail(path, e.what());
  }
  config_fail(path + ".type", "unknown metric type '" + type + "'");
}

CertifyOptions certify_options(const json& task, const std::string& path,
                               const RunOverrides& overrides, std::uint64_t base_seed,
                               std::int64_t config_budget) {
  CertifyOptions opts;
  opts.seed = base_seed;
  if (config_budget > 0) {
    opts.per_shell = static_cast<int>(std::min<std::int64_t>(config_budget, 1 << 20));
  }
  if (task.contains("options")) {
    const json& o = task.at("options");
    const std::string op = path + ".options";
    opts.n_max = field_or<std::int64_t>(o, op, "n_max", opts.n_max);
    opts.dyadic_depth = field_or<int>(o, op, "dyadic_depth", opts.dyadic_depth);
    opts.shells = field_or<int>(o, op, "shells", opts.shells);
    opts.per_shell = field_or<int>(o, op, "per_shell", opts.per_shell);
    opts.exhaustive_cap = field_or<std::int64_t>(o, op, "exhaustive_cap", opts.exhaustive_cap);
    opts.bound_factor = field_or<double>(o, op, "bound_factor", opts.bound_factor);
    opts.slack = field_or<double>(o, op, "slack", opts.slack);
    opts.seed = field_or<std::uint64_t>(o, op, "seed", opts.seed);
  }
  opts.bound_factor = field_or<double>(task, path, "bound_factor", opts.bound_factor);
  opts.slack = field_or<double>(task, path, "slack", opts.slack);
  if (overrides.budget) opts.per_shell = static_cast<int>(*overrides.budget);
  if (overrides.seed) opts.seed = *overrides.seed;
  return opts;
}

json witness_to_json(const Group& ctx, const Witness& w) {
  json out;
  out["element"] = element_to_json(ctx, w.element);
  out["violated"] = w.violated;
  out["n"] = w.n;
  out["lhs"] = w.lhs;
  out["rhs"] = w.rhs;
  json trace = json::array();
  for (const auto& p : w.power_trace) {
    trace.push_back(json{{"exponent", p.exponent}, {"distance", p.distance}});
  }
  out["power_trace"] = std::move(trace);
  return out;
}

std::string task_category(const json& task) {
  const std::string t = task.value("task", "");
  if (t == "certify" || t == "fit" || t == "nss" || t == "sin") return "certify";
  if (t == "construct") return "construct";
  if (t == "oneparam") return "oneparam";
  if (t == "compare") return "compare";
  return t;
}

json run_certify_task(const Group& ctx, const Metric& metric, const json& task,
                      const std::string& path, const RunOverrides& overrides,
                      std::uint64_t base_seed, std::int64_t config_budget) {
  const std::string kind = field_as<std::string>(task, path, "task");
  const CertifyOptions opts = certify_options(task, path, overrides, base_seed, config_budget);
  Certificate cert;
  if (kind == "nss") {
    const double u = field_as<double>(task, path, "u_radius");
    cert = field_or<bool>(task, path, "uniform", false)
               ? check_uniform_nss(ctx, metric, u, opts)
               : check_nss(ctx, metric, u, opts);
  } else if (kind == "sin") {
    cert = check_local_sin(ctx, metric, field_as<double>(task, path, "u_radius"), opts);
  } else if (kind == "fit") {
    FitOptions fopts;
    fopts.check = opts;
    fopts.u_hi = field_or<double>(task, path, "u_hi", fopts.u_hi);
    fopts.u_lo = field_or<double>(task, path, "u_lo", fopts.u_lo);
    fopts.k_cap = field_or<double>(task, path, "k_cap", fopts.k_cap);
    fopts.refine_steps = field_or<int>(task, path, "refine_steps", fopts.refine_steps);
    cert = fit_constants(ctx, metric, field_as<std::string>(task, path, "condition"), fopts);
  } else {
    const std::string condition = field_as<std::string>(task, path, "condition");
    if (condition == "cond2") {
      cert = check_condition2(ctx, metric, field_as<double>(task, path, "u_radius"), opts);
    } else if (condition == "cond3") {
      cert = check_condition3(ctx, metric, field_as<double>(task, path, "eps"),
                              field_as<double>(task, path, "K"), opts);
    } else if (condition == "cond4") {
      cert = check_condition4(ctx, metric, field_as<double>(task, path, "u_radius"),
                              field_as<double>(task, path, "K"), opts);
    } else if (condition == "nss") {
      cert = check_nss(ctx, metric, field_as<double>(task, path, "u_radius"), opts);
    } else if (condition == "uniform_nss") {
      cert = check_uniform_nss(ctx, metric, field_as<double>(task, path, "u_radius"), opts);
    } else if (condition == "right_lipschitz") {
      cert = check_right_lipschitz(ctx, metric, field_as<double>(task, path, "v_radius"), opts);
    } else if (condition == "local_sin") {
      cert = check_local_sin(ctx, metric, field_as<double>(task, path, "u_radius"), opts);
    } else if (condition == "growth") {
      cert = check_growth_from_small_ball(ctx, metric, field_as<int>(task, path, "p"), opts);
    } else {
      config_fail(path + ".condition", "unknown condition '" + condition + "'");
    }
  }
  json out = certificate_to_json(ctx, cert);
  out["task"] = kind;
  return out;
}

json run_construct_task(const Group& ctx, const Metric& metric, const json& task,
                        const std::string& path, const RunOverrides& overrides,
                        std::uint64_t base_seed, std::int64_t config_budget) {
  json out;
  out["task"] = "construct";
  out["metric"] = metric.name;
  out["provenance"] = provenance_name(metric.provenance);
  out["bounded"] = metric.bounded;
  out["upper_bound_only"] = metric.upper_bound_only;
  json constants = json::object();
  for (const auto& [k, v] : metric.constants) constants[k] = v;
  out["constants"] = std::move(constants);
  const int budget =
      overrides.budget
          ? static_cast<int>(*overrides.budget)
          : field_or<int>(task, path, "validation_budget",
                          config_budget > 0 ? static_cast<int>(config_budget) : 2048);
  const MetricValidation check = validate_metric(ctx, metric, budget, base_seed);
  out["validation"] = json{{"ok", check.ok},
                           {"failure", check.failure},
                           {"worst_symmetry", check.worst_symmetry},
                           {"worst_triangle", check.worst_triangle},
                           {"worst_left_invariance", check.worst_left_invariance},
                           {"residual_at_floor", check.residual_at_floor}};
  out["verdict"] = check.ok ? "holds_on_budget" : "refuted";
  return out;
}

json run_oneparam_task(const Group& ctx, const Metric& metric, const json& task,
                       const std::string& path, const RunOverrides& overrides,
                       std::uint64_t base_seed, std::int64_t config_budget) {
  (void)config_budget;
  json out;
  out["task"] = "oneparam";
  const int k = field_or<int>(task, path, "k", 1);
  const int depth = field_or<int>(task, path, "depth", 16);
  const double eps = field_or<double>(task, path, "eps", 0.25);
  const double tol = field_or<double>(task, path, "tol", 1e-8);
  out["k"] = k;
  out["depth"] = depth;
  out["eps"] = eps;
  out["required_depth_for_tol"] = required_depth(tol, k);

  Element base = ctx.identity();
  std::optional<Matrix> tangent;  // reference generator when synthesised
  if (task.contains("element")) {
    base = element_from_json_at(ctx, task.at("element"), path + ".element");
  } else if (ctx.matrix_kind()) {
    const double scale = field_or<double>(task, path, "tangent_scale", eps * 0.5);
    std::mt19937_64 rng(overrides.seed.value_or(base_seed));
    Matrix dir = ctx.random_tangent(rng);
    tangent = Matrix(dir * scale);
    base = ctx.exp_tangent(*tangent);
  } else {
    config_fail(path, "non-matrix contexts need an explicit element");
  }

  RootChain chain;
  try {
    chain = build_root_chain(ctx, metric, base, k, depth, eps);
  } catch (const ContractionFailure& e) {
    out["status"] = "contraction_failure";
    out["level"] = e.level;
    out["ratio"] = e.ratio;
    out["message"] = e.what();
    out["verdict"] = "refuted";
    return out;
  } catch (const NoRootInBall& e) {
    out["status"] = "no_root";
    out["message"] = e.what();
    out["verdict"] = "refuted";
    return out;
  }
  out["status"] = "ok";
  out["level_distances"] = chain.level_distance;
  out["contraction_ratios"] = chain.contraction_ratio;

  double max_err = 0;
  bool have_reference = tangent.has_value();
  if (task.contains("eval_points")) {
    const auto points = field_as<std::vector<double>>(task, path, "eval_points");
    json evals = json::array();
    for (double alpha : points) {
      const Element v = eval_real(ctx, chain, alpha);
      json entry;
      entry["alpha"] = alpha;
      const double away = metric.eval(v, ctx.identity());
      entry["distance_to_identity"] = away;
      if (have_reference) {
        const Element ref = ctx.exp_tangent(Matrix(*tangent * alpha));
        const double err = operator_norm(v.matrix() - ref.matrix());
        entry["reference_error"] = err;
        max_err = std::max(max_err, err);
      }
      evals.push_back(std::move(entry));
    }
    out["evaluations"] = std::move(evals);
  }
  if (have_reference) {
    out["max_reference_error"] = max_err;
    out["verdict"] = max_err <= tol ? "holds_on_budget" : "refuted";
  } else {
    out["verdict"] = "holds_on_budget";
  }
  return out;
}

json run_compare_task(const Group& ctx, const Metric& metric, const json& task,
                      const std::string& path, const RunOverrides& overrides,
                      std::uint64_t base_seed, std::int64_t config_budget) {
  json out;
  out["task"] = "compare";
  const std::string mode = field_or<std::string>(task, path, "mode", "qi");
  Metric other = metric_from_json(ctx, require_field(task, path, "other_metric"),
                                  path + ".other_metric");
  int probes_budget = field_or<int>(
      task, path, "probes", config_budget > 0 ? static_cast<int>(config_budget) : 512);
  if (overrides.budget) probes_budget = static_cast<int>(*overrides.budget);
  const auto probes = comparison_probes(ctx, probes_budget, base_seed);
  out["mode"] = mode;
  out["other_metric"] = other.name;
  if (mode == "qi") {
    const QIReport qi = fit_quasi_isometry(ctx, metric, other, probes);
    out["K"] = qi.K;
    out["C"] = qi.C;
    out["max_violation"] = qi.max_violation;
    out["sample_budget"] = qi.sample_budget;
    out["witness_scales"] = qi.witness_scales;
    out["verdict"] = verdict_name(qi.verdict);
    return out;
  }
  if (mode == "bilipschitz") {
    const double v_radius = field_or<double>(task, path, "v_radius", 1.0);
    const BiLipschitzReport bl = bilipschitz_constant(ctx, metric, other, v_radius, probes);
    out["L"] = bl.L;
    out["K_local"] = bl.K_local;
    out["M"] = bl.M;
    out["N"] = bl.N;
    out["inf_outside"] = bl.inf_outside;
    out["direct_equal"] = bl.direct_equal;
    out["worst_ratio"] = bl.worst_ratio;
    out["verified"] = bl.verified;
    out["verdict"] = bl.verified ? "holds_on_budget" : "inconclusive";
    return out;
  }
  config_fail(path + ".mode", "unknown compare mode '" + mode + "'");
}

json run_task(const Group& ctx, const Metric& metric, const json& task, std::size_t index,
              const RunOverrides& overrides, std::uint64_t base_seed,
              std::int64_t config_budget) {
  const std::string path = "tasks[" + std::to_string(index) + "]";
  const std::string kind = field_as<std::string>(task, path, "task");
  const std::uint64_t task_seed =
      overrides.seed.value_or(base_seed) + static_cast<std::uint64_t>(index) * 0x9E3779B97F4A7C15ull;
  json out;
  if (kind == "certify" || kind == "fit" || kind == "nss" || kind == "sin") {
    out = run_certify_task(ctx, metric, task, path, overrides, task_seed, config_budget);
  } else if (kind == "construct") {
    out = run_construct_task(ctx, metric, task, path, overrides, task_seed, config_budget);
  } else if (kind == "oneparam") {
    out = run_oneparam_task(ctx, metric, task, path, overrides, task_seed, config_budget);
  } else if (kind == "compare") {
    out = run_compare_task(ctx, metric, task, path, overrides, task_seed, config_budget);
  } else {
    config_fail(path + ".task", "unknown task '" + kind + "'");
  }
  if (!out.contains("status")) out["status"] = "ok";
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse_text(const std::string& text) {
  ExperimentConfig config;
  try {
    config.raw = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid json: ") + e.what());
  }
  if (!config.raw.is_object()) throw ConfigError("config: top level must be an object");
  if (config.raw.contains("schema_version")) {
    const std::string v = field_as<std::string>(config.raw, "", "schema_version");
    const std::string major = v.substr(0, v.find('.'));
    const std::string expected(kSchemaVersion);
    if (major != expected.substr(0, expected.find('.'))) {
      throw ConfigError("config: schema_version: unsupported major version '" + v + "'");
    }
  }
  // every referenced descriptor must resolve up front: group, the primary
  // metric, and any per-task comparison metrics
  (void)field_as<std::uint64_t>(config.raw, "", "seed");
  (void)field_as<std::int64_t>(config.raw, "", "budget");
  Group ctx = group_from_json(require_field(config.raw, "", "group"));
  (void)metric_from_json(ctx, require_field(config.raw, "", "metric"), "metric");
  if (!config.raw.contains("tasks") || !config.raw.at("tasks").is_array()) {
    throw ConfigError("config: tasks: missing or not an array");
  }
  const json& tasks = config.raw.at("tasks");
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const std::string path = "tasks[" + std::to_string(i) + "]";
    (void)field_as<std::string>(tasks[i], path, "task");
    if (tasks[i].contains("other_metric")) {
      (void)metric_from_json(ctx, tasks[i].at("other_metric"), path + ".other_metric");
    }
  }
  return config;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_text(buffer.str());
}

RunResult run_experiment(const ExperimentConfig& config, const RunOverrides& overrides) {
  const auto start = std::chrono::steady_clock::now();
  const json& raw = config.raw;

  Group ctx = group_from_json(require_field(raw, "", "group"));
  Metric metric = metric_from_json(ctx, require_field(raw, "", "metric"), "metric");
  const std::uint64_t base_seed =
      overrides.seed.value_or(field_or<std::uint64_t>(raw, "", "seed", 1));
  const std::int64_t config_budget =
      overrides.budget.value_or(field_or<std::int64_t>(raw, "", "budget", 0));

  std::vector<std::pair<std::size_t, json>> selected;
  const json& tasks = raw.at("tasks");
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!overrides.task_filter.empty()) {
      const std::string category = task_category(tasks[i]);
      bool wanted = false;
      for (const auto& f : overrides.task_filter) wanted = wanted || f == category;
      if (!wanted) continue;
    }
    selected.emplace_back(i, tasks[i]);
  }

  std::vector<json> results(selected.size());
  auto run_one = [&](std::size_t slot) {
    const auto& [index, task] = selected[slot];
    try {
      results[slot] = run_task(ctx, metric, task, index, overrides, base_seed, config_budget);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      results[slot] = json{{"task", task.value("task", "?")},
                           {"status", "error"},
                           {"message", e.what()},
                           {"verdict", "inconclusive"}};
    }
  };
  if (overrides.parallel && selected.size() > 1) {
    std::vector<std::future<void>> futures;
    futures.reserve(selected.size());
    for (std::size_t s = 0; s < selected.size(); ++s) {
      futures.push_back(std::async(std::launch::async, run_one, s));
    }
    for (auto& f : futures) f.get();
  } else {
    for (std::size_t s = 0; s < selected.size(); ++s) run_one(s);
  }

  json report;
  report["schema_version"] = kSchemaVersion;
  report["artifact_version"] = kArtifactVersion;
  report["config"] = raw;
  if (raw.contains("name")) report["name"] = raw.at("name");
  report["group"] = ctx.describe();
  report["metric"] = metric.name;
  report["seed"] = base_seed;
  report["budget"] = config_budget;
  report["tasks"] = results;

  int holds = 0, refuted = 0, inconclusive = 0;
  for (const auto& r : results) {
    const std::string v = r.value("verdict", "inconclusive");
    if (v == "holds_on_budget" || v == "holds_exhaustively") {
      ++holds;
    } else if (v == "refuted") {
      ++refuted;
    } else {
      ++inconclusive;
    }
  }
  report["summary"] = json{{"holds", holds}, {"refuted", refuted}, {"inconclusive", inconclusive}};
  const auto end = std::chrono::steady_clock::now();
  report["wall_clock_ms"] =
      std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(end - start).count();

  RunResult out;
  out.report = std::move(report);
  out.exit_code = refuted > 0 ? 1 : (inconclusive > 0 ? 2 : 0);
  return out;
}

std::string emit_report(const json& report) {
  return report.dump(2) + "\n";  // nlohmann objects iterate in sorted key order
}

json parse_report(const std::string& text) {
  json report;
  try {
    report = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("report: invalid json: ") + e.what());
  }
  if (!report.is_object() || !report.contains("schema_version")) {
    throw ConfigError("report: missing schema_version");
  }
  const std::string v = report.at("schema_version").get<std::string>();
  const std::string expected(kSchemaVersion);
  if (v.substr(0, v.find('.')) != expected.substr(0, expected.find('.'))) {
    throw ConfigError("report: unsupported schema major version '" + v + "'");
  }
  return report;
}

json strip_wall_clock(json report) {
  report.erase("wall_clock_ms");
  return report;
}

std::string render_text(const json& report) {
  std::ostringstream os;
  os << "group " << report.value("group", "?") << ", metric " << report.value("metric", "?")
     << ", seed " << report.value("seed", std::uint64_t(0)) << "\n";
  if (report.contains("tasks")) {
    for (const auto& task : report.at("tasks")) {
      os << "  - " << task.value("task", "?");
      if (task.contains("condition")) os << " " << task.at("condition").get<std::string>();
      if (task.contains("mode")) os << " " << task.at("mode").get<std::string>();
      os << ": " << task.value("verdict", "?");
      if (task.contains("constants") && task.at("constants").is_object()) {
        for (auto it = task.at("constants").begin(); it != task.at("constants").end(); ++it) {
          os << " " << it.key() << "=" << it.value().dump();
        }
      }
      if (task.contains("message")) os << " (" << task.at("message").get<std::string>() << ")";
      os << "\n";
    }
  }
  if (report.contains("summary")) {
    const auto& s = report.at("summary");
    os << "summary: " << s.value("holds", 0) << " hold, " << s.value("refuted", 0)
       << " refuted, " << s.value("inconclusive", 0) << " inconclusive\n";
  }
  return os.str();
}

json certificate_to_json(const Group& ctx, const Certificate& cert) {
  json out;
  out["condition"] = cert.condition;
  out["verdict"] = verdict_name(cert.verdict);
  json constants = json::object();
  for (const auto& [k, v] : cert.constants) constants[k] = v;
  out["constants"] = std::move(constants);
  json diagnostics = json::object();
  for (const auto& [k, v] : cert.diagnostics) diagnostics[k] = v;
  out["diagnostics"] = std::move(diagnostics);
  out["samples_used"] = cert.samples_used;
  out["seed"] = cert.seed;
  out["exhaustive"] = cert.exhaustive;
  if (cert.witness) out["witness"] = witness_to_json(ctx, *cert.witness);
  return out;
}

json element_to_json(const Group& ctx, const Element& g) {
  (void)ctx;
  json out;
  if (g.is_matrix()) {
    const Matrix& m = g.matrix();
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        row.push_back(json::array({std::real(m(i, j)), std::imag(m(i, j))}));
      }
      rows.push_back(std::move(row));
    }
    out["matrix"] = std::move(rows);
  } else if (std::holds_alternative<Word>(g.payload)) {
    out["word"] = g.word().letters;
  } else if (std::holds_alternative<Residues>(g.payload)) {
    out["residues"] = g.residues().v;
  } else {
    out["table_index"] = g.table_index();
  }
  return out;
}

Element element_from_json(const Group& ctx, const json& j) {
  if (!j.is_object()) throw std::invalid_argument("element: expected an object");
  Element g;
  if (j.contains("matrix")) {
    const auto& rows = j.at("matrix");
    const auto n = static_cast<Eigen::Index>(rows.size());
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& row = rows.at(static_cast<std::size_t>(i));
      if (static_cast<Eigen::Index>(row.size()) != n) {
        throw std::invalid_argument("element.matrix: ragged rows");
      }
      for (Eigen::Index c = 0; c < n; ++c) {
        const auto& cell = row.at(static_cast<std::size_t>(c));
        m(i, c) = Complex(cell.at(0).get<double>(), cell.at(1).get<double>());
      }
    }
    g = Element{std::move(m)};
  } else if (j.contains("word")) {
    g = Element{Word{j.at("word").get<std::vector<std::int32_t>>()}};
  } else if (j.contains("residues")) {
    g = Element{Residues{j.at("residues").get<std::vector<std::int64_t>>()}};
  } else if (j.contains("table_index")) {
    g = Element{TableIndex{j.at("table_index").get<int>()}};
  } else {
    throw std::invalid_argument(
        "element: expected one of matrix / word / residues / table_index");
  }
  ctx.validate(g);
  return g;
}

}  // namespace minmet
