#include "zonegraph/cli.hpp"

int main(int argc, char** argv) { return zonegraph::run(argc, argv); }
