#include "freqcross/cli.hpp"

int main(int argc, char** argv) { return freqcross::cli_main(argc, argv); }
