#include "isokit/cli.hpp"

int main(int argc, char** argv) { return isokit::run_command(argc, argv); }
