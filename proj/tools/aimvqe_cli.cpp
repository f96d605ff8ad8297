#include "aimvqe/experiment.hpp"

int main(int argc, char** argv) { return aimvqe::run_cli(argc, argv); }
