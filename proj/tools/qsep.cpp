#include "qsep/cli.hpp"

int main(int argc, char** argv) { return qsep::cli::run(argc, argv); }
