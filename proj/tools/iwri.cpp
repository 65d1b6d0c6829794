#include "iwri/cli.hpp"

int main(int argc, char** argv) { return iwri::cli_dispatch(argc, argv); }
