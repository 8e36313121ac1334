#include "mshape/cli.hpp"

int main(int argc, char** argv) { return mshape::cli::run(argc, argv); }
