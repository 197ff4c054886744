/* Integer loop kernels with one independent loop, one loop-carried
 * dependence and one sum reduction; output is thread-count invariant once
 * the safe loops carry OpenMP pragmas (integer arithmetic is associative).
 */
#include <stdio.h>

#define N 100000

static long a[N];
static long b[N];
static long c[N];

int main(void) {
    long s = 0;
    long m = 0;
    int i;
    for (i = 0; i < N; i++) {
        b[i] = (long)i % 17L;
        c[i] = (long)i % 29L;
    }
    for (i = 0; i < N; i++) {
        a[i] = b[i] * c[i] + 3L;
    }
    for (i = 1; i < N; i++) {
        b[i] = b[i - 1] + 1L;
    }
    for (i = 0; i < N; i++) {
        s += a[i];
    }
    for (i = 0; i < N; i++) {
        m = m + a[i] % 101L;
    }
    printf("%ld %ld %ld\n", s, m, b[N - 1]);
    return 0;
}
