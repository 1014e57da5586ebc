#include "gpath/cli.hpp"

int main(int argc, char** argv) { return gpath::cli::run(argc, argv); }
