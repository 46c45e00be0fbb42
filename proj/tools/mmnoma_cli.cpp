#include "mmnoma/cli_app.hpp"

int main(int argc, char** argv) { return mmnoma::cli::run_cli(argc, argv); }
