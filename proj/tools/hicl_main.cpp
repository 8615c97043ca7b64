#include <hicl/hicl.hpp>

int main(int argc, char** argv) { return hicl::run_cli(argc, argv); }
