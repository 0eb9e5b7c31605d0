#include "mfgz/cli.hpp"

int main(int argc, char** argv) { return mfgz::run_cli(argc, argv); }
