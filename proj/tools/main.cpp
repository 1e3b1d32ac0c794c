#include "netlineq/harness.hpp"

int main(int argc, char** argv) { return netlineq::cli_main(argc, argv); }
