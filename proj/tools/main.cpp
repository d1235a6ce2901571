#include "cli.hpp"

int main(int argc, char** argv) { return gridfno::cli::run(argc, argv); }
