#include "synthact/cli.hpp"

int main(int argc, char** argv) { return synthact::dispatch(argc, argv); }
