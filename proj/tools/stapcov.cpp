#include "stapcov/harness/cli.hpp"

int main(int argc, char** argv) { return stapcov::harness::run_cli(argc, argv); }
