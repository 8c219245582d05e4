#include "stylevec/cli.hpp"

int main(int argc, char** argv) { return stylevec::cli::run(argc, argv); }
