#include "flipforge/pipeline.hpp"

int main(int argc, char **argv) { return flipforge::run_cli(argc, argv); }
