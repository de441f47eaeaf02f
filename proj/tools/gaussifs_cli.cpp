#include "gaussifs/cli.hpp"

int main(int argc, char** argv) { return gaussifs::cli_main(argc, argv); }
