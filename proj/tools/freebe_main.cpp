#include "freebe/cli.hpp"

int main(int argc, char** argv) { return freebe::cli::run(argc, argv); }
