#include "adaptgen/cli.hpp"

int main(int argc, char** argv) { return adaptgen::run_cli(argc, argv); }
