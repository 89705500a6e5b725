#include "adiab/cli.hpp"

int main(int argc, char** argv) { return adiab::run_cli(argc, argv); }
