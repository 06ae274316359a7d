#include "spikeradar/cli.hpp"

int main(int argc, char** argv) { return spikeradar::cli::run(argc, argv); }
