#include "negfspec/cli.hpp"

int main(int argc, char** argv) { return negf::run_cli(argc, argv); }
