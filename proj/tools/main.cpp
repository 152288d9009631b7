#include "coreset/cli.hpp"

int main(int argc, char** argv) { return coreset::dispatch(argc, argv); }
