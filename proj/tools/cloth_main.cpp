#include "clothsim/cli.hpp"

int main(int argc, char** argv) { return cloth::run_cli(argc, argv); }
