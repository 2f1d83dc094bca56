#include "agdl/report.hpp"

int main(int argc, char** argv) { return agdl::cli_main(argc, argv); }
