#include "emofad/cli.hpp"

int main(int argc, char** argv) { return emofad::cli::run(argc, argv); }
