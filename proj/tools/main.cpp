#include "cli.hpp"

int main(int argc, char** argv) { return cloudinv::cli::parse_and_dispatch(argc, argv); }
