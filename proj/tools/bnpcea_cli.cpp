#include "bnpcea/cli.hpp"

int main(int argc, char** argv) { return bnpcea::cli_main(argc, argv); }
