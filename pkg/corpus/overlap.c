/* Pairwise Gaussian overlap between a synthetic atom pocket and a list of
 * ligands, normalized so that a set overlapped with itself scores 1.0.
 *
 * Input (argv[1]): first line is the pocket atom count, then one line per
 * ligand: "count" or "count seed". Without an explicit seed, ligand i uses
 * seed 1000+i. Coordinates are a pure hash of (seed, index, axis); seeds in
 * different mod-7 classes land in boxes at least 20 units apart, so their
 * overlap is numerically zero.
 *
 * Output: one overlap value per ligand with 9 decimals.
 */
#include <stdio.h>
#include <stdlib.h>
#include <math.h>

#define POCKET_SEED 4242L

double coord(long seed, int i, int axis) {
    unsigned long h = (unsigned long)seed * 2654435761UL
        + (unsigned long)i * 97531UL + (unsigned long)axis * 7919UL;
    double base = (double)(seed % 7L) * 20.0;
    h ^= h >> 13;
    h *= 1099511628211UL;
    h ^= h >> 7;
    return base + (double)(h % 1000003UL) / 1000003.0 * 10.0;
}

double pair_sum(long seed_a, int na, long seed_b, int nb) {
    double s = 0.0;
    for (int i = 0; i < na; i++) {
        double ax = coord(seed_a, i, 0);
        double ay = coord(seed_a, i, 1);
        double az = coord(seed_a, i, 2);
        for (int j = 0; j < nb; j++) {
            double dx = ax - coord(seed_b, j, 0);
            double dy = ay - coord(seed_b, j, 1);
            double dz = az - coord(seed_b, j, 2);
            s += exp(-(dx * dx + dy * dy + dz * dz));
        }
    }
    return s;
}

double measure_overlap(long seed_a, int na, long seed_b, int nb) {
    double sab = pair_sum(seed_a, na, seed_b, nb);
    double saa = pair_sum(seed_a, na, seed_a, na);
    double sbb = pair_sum(seed_b, nb, seed_b, nb);
    return sab / sqrt(saa * sbb);
}

int main(int argc, char **argv) {
    FILE *f;
    char line[256];
    int np;
    int lig = 0;
    double r;
    if (argc < 2) {
        fprintf(stderr, "usage: overlap sizes.txt\n");
        return 1;
    }
    f = fopen(argv[1], "r");
    if (f == NULL || fgets(line, sizeof line, f) == NULL
            || sscanf(line, "%d", &np) != 1 || np < 1) {
        fprintf(stderr, "malformed sizes file\n");
        if (f != NULL) {
            fclose(f);
        }
        return 1;
    }
    while (fgets(line, sizeof line, f) != NULL) {
        int nl;
        long seed;
        int got = sscanf(line, "%d %ld", &nl, &seed);
        if (got < 1) {
            continue;
        }
        if (got < 2) {
            seed = 1000L + (long)lig;
        }
        if (nl < 1) {
            fprintf(stderr, "malformed sizes file\n");
            fclose(f);
            return 1;
        }
        r = measure_overlap(POCKET_SEED, np, seed, nl);
        printf("%.9f\n", r);
        lig++;
    }
    fclose(f);
    return 0;
}
