#include "msbaco/cli.hpp"

int main(int argc, char** argv) { return msbaco::cli::main(argc, argv); }
