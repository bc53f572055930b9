#include "superosc/commands.hpp"

int main(int argc, char** argv) { return superosc::run_cli(argc, argv); }
