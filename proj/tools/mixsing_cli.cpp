#include "mixsing/cli.hpp"

int main(int argc, char** argv) { return mixsing::cli_main(argc, argv); }
