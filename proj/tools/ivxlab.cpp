#include "ivxlab/cli.hpp"

int main(int argc, char** argv) { return ivxlab::run_command(argc, argv); }
