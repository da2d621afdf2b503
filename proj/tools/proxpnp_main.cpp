#include "proxpnp/harness.hpp"

int main(int argc, char** argv) { return proxpnp::cli_main(argc, argv); }
