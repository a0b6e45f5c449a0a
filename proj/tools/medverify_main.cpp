#include "medverify/cli.hpp"

int main(int argc, char** argv) {
  return medverify::cli::run(argc, argv);
}
