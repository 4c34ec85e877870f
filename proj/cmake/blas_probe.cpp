// Exits 0 when the linked BLAS multiplies a blocked-size matrix correctly.
#include <cmath>
#include <cstdio>
#include <vector>

extern "C" void dgemm_(const char* ta, const char* tb, const int* m, const int* n, const int* k,
                       const double* alpha, const double* a, const int* lda, const double* b,
                       const int* ldb, const double* beta, double* c, const int* ldc);

int main() {
  const int n = 333;
  std::vector<double> a(n * n), b(n * n), c(n * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      a[i + j * n] = (3 * i + 7 * j) % 11 - 5.0;
      b[i + j * n] = (5 * i + 2 * j) % 13 - 6.0;
    }
  }
  const double one = 1.0, zero = 0.0;
  dgemm_("N", "N", &n, &n, &n, &one, a.data(), &n, b.data(), &n, &zero, c.data(), &n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += a[i + k * n] * b[k + j * n];
      if (s != c[i + j * n]) {
        std::printf("mismatch at (%d, %d)\n", i, j);
        return 1;
      }
    }
  }
  return 0;
}
