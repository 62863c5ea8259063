#include "cjscope/cli.hpp"

int main(int argc, char** argv) { return cjscope::cli::run(argc, argv); }
