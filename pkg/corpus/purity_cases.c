/* Twelve labeled functions for exercising memoizability detection.
 * Expected memoizable: sq, adds, poly, root_mix, fact, clampd.
 * Expected rejected: log_val (IO), bump_global (global write), write_out
 * (write through a pointer argument), use_rand (unknown external call),
 * stateful (static local), sum_buf (pointer argument, not keyable by value).
 */
#include <stdio.h>
#include <stdlib.h>
#include <math.h>

double shared_total = 0.0;

double sq(double x) {
    return x * x;
}

int adds(int a, int b) {
    return a + b;
}

double poly(double x) {
    return sq(x) + 3.0 * x + 1.0;
}

double root_mix(double a, double b) {
    return sqrt(fabs(a)) + fabs(b);
}

long fact(long n) {
    if (n <= 1) {
        return 1;
    }
    return n * fact(n - 1);
}

double clampd(double v, double lo, double hi) {
    if (v < lo) {
        return lo;
    }
    if (v > hi) {
        return hi;
    }
    return v;
}

double log_val(double v) {
    printf("%f\n", v);
    return v;
}

double bump_global(double v) {
    shared_total += v;
    return shared_total;
}

double write_out(double *dst, double v) {
    *dst = v * 2.0;
    return v;
}

int use_rand(int n) {
    return rand() % n;
}

int stateful(int step) {
    static int counter = 0;
    counter += step;
    return counter;
}

double sum_buf(const double *buf, int n) {
    double s = 0.0;
    int i;
    for (i = 0; i < n; i++) {
        s += buf[i];
    }
    return s;
}

int main(void) {
    double sink[1];
    double s = sq(2.0) + poly(1.0) + root_mix(-4.0, 2.0) + clampd(5.0, 0.0, 2.0);
    s += (double)adds(1, 2) + (double)fact(5) + log_val(1.5) + bump_global(0.5);
    s += write_out(sink, 3.0) + (double)use_rand(7) + (double)stateful(2);
    s += sum_buf(sink, 1);
    printf("%f\n", s);
    return 0;
}
