#include <cstdio>

int main() {
  std::fprintf(stderr, "sift: command-line interface not wired up yet\n");
  return 2;
}
