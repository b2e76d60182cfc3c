#include <cstdio>

int main() {
  std::puts("wavegen: placeholder");
  return 0;
}
