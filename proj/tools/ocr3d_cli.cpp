#include <iostream>

#include "ocr3d/commands.hpp"

int main(int argc, char** argv) { return ocr3d::run_cli(argc, argv, std::cout, std::cerr); }
