#include "lazyfb_cli.hpp"

int main(int argc, char **argv) { return lazyfb::cli::run(argc, argv); }
