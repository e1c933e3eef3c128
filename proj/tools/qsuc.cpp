#include "qsuc/cli.hpp"

int main(int argc, char** argv) { return qsuc::cli::run(argc, argv); }
