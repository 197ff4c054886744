/* A pure scalar metric helper invoked over and over with a small set of
 * distinct arguments, standing in for the per-vertex metric the centrality
 * pipeline memoizes. Compile the woven file with -DAW_MEMOIZED to dump the
 * table counters on stderr.
 */
#include <stdio.h>
#include <math.h>

#ifdef AW_MEMOIZED
void compute_metric_memo_stats(unsigned long *hits, unsigned long *misses,
                               unsigned long *evictions);
#endif

double compute_metric(double x) {
    double acc = 0.0;
    int k;
    for (k = 1; k <= 64; k++) {
        acc += sin(x / (double)k) / (double)k;
    }
    return acc;
}

int main(void) {
    double total = 0.0;
    int rep;
    int i;
    for (rep = 0; rep < 10; rep++) {
        for (i = 0; i < 16; i++) {
            total += compute_metric((double)i * 0.5);
        }
    }
    printf("%.12f\n", total);
#ifdef AW_MEMOIZED
    {
        unsigned long h;
        unsigned long m;
        unsigned long e;
        compute_metric_memo_stats(&h, &m, &e);
        fprintf(stderr, "hits=%lu misses=%lu evictions=%lu\n", h, m, e);
    }
#endif
    return 0;
}
