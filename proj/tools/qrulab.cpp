#include "qru/cli.hpp"

int main(int argc, char** argv) { return qru::cli::run(argc, argv); }
