#include "minmet/report.hpp"

int main(int argc, char** argv) { return minmet::cli_main(argc, argv); }
