/* Brandes betweenness centrality over an undirected weighted graph.
 *
 * Input (argv[1]): plain-text edge list, first line "V E", then E lines
 * "u v w" with 0-based vertices and positive weights.
 * Output: one centrality per vertex with 6 decimals, unnormalized.
 * Convention: each unordered source/sink pair contributes once, so the
 * per-source accumulated dependencies are halved at the end.
 *
 * Build with the AW_FLOATVER define to run the woven reduced-precision
 * clone (brandes_f) instead of the double-precision original.
 */
#include <stdio.h>
#include <stdlib.h>

#define MAXV 2048
#define MAXE 131072

static int nv;
static int ne;
static int edge_to[2 * MAXE];
static double edge_w[2 * MAXE];
static int edge_next[2 * MAXE];
static int head[MAXV];
static int nhalf;

#ifdef AW_FLOATVER
void brandes_f(float cent[]);
#endif

static int read_graph(const char *path) {
    FILE *f = fopen(path, "r");
    int i, u, v;
    double w;
    if (f == NULL) {
        return 1;
    }
    if (fscanf(f, "%d %d", &nv, &nhalf) != 2 || nv < 1 || nv > MAXV
            || nhalf < 0 || nhalf > MAXE) {
        fclose(f);
        return 1;
    }
    for (i = 0; i < nv; i++) {
        head[i] = -1;
    }
    ne = 0;
    for (i = 0; i < nhalf; i++) {
        if (fscanf(f, "%d %d %lf", &u, &v, &w) != 3) {
            fclose(f);
            return 1;
        }
        if (u < 0 || u >= nv || v < 0 || v >= nv || u == v || w <= 0.0) {
            fclose(f);
            return 1;
        }
        edge_to[ne] = v;
        edge_w[ne] = w;
        edge_next[ne] = head[u];
        head[u] = ne;
        ne++;
        edge_to[ne] = u;
        edge_w[ne] = w;
        edge_next[ne] = head[v];
        head[v] = ne;
        ne++;
    }
    fclose(f);
    return 0;
}

void brandes(double cent[]) {
    double dist[MAXV];
    double sigma[MAXV];
    double delta[MAXV];
    int done[MAXV];
    int order[MAXV];
    int s;
    int i;
    for (i = 0; i < nv; i++) {
        cent[i] = 0.0;
    }
    for (s = 0; s < nv; s++) {
        int settled = 0;
        for (i = 0; i < nv; i++) {
            dist[i] = 1e30;
            sigma[i] = 0.0;
            delta[i] = 0.0;
            done[i] = 0;
        }
        dist[s] = 0.0;
        sigma[s] = 1.0;
        while (1) {
            int best = -1;
            double bestd = 1e30;
            int e;
            for (i = 0; i < nv; i++) {
                if (!done[i] && dist[i] < bestd) {
                    bestd = dist[i];
                    best = i;
                }
            }
            if (best < 0) {
                break;
            }
            done[best] = 1;
            order[settled] = best;
            settled = settled + 1;
            for (e = head[best]; e >= 0; e = edge_next[e]) {
                int to = edge_to[e];
                double nd = dist[best] + edge_w[e];
                if (nd < dist[to]) {
                    dist[to] = nd;
                    sigma[to] = sigma[best];
                } else if (nd == dist[to]) {
                    sigma[to] = sigma[to] + sigma[best];
                }
            }
        }
        for (i = settled - 1; i > 0; i--) {
            int w = order[i];
            int e;
            for (e = head[w]; e >= 0; e = edge_next[e]) {
                int v = edge_to[e];
                if (dist[v] + edge_w[e] == dist[w]) {
                    delta[v] = delta[v] + sigma[v] / sigma[w] * (1.0 + delta[w]);
                }
            }
            if (w != s) {
                cent[w] = cent[w] + delta[w];
            }
        }
    }
    for (i = 0; i < nv; i++) {
        cent[i] = cent[i] * 0.5;
    }
}

int main(int argc, char **argv) {
    int i;
    if (argc < 2) {
        fprintf(stderr, "usage: betweenness graph.txt\n");
        return 1;
    }
    if (read_graph(argv[1]) != 0) {
        fprintf(stderr, "malformed graph file\n");
        return 1;
    }
#ifdef AW_FLOATVER
    {
        static float centf[MAXV];
        brandes_f(centf);
        for (i = 0; i < nv; i++) {
            printf("%.6f\n", centf[i]);
        }
    }
#else
    {
        static double cent[MAXV];
        brandes(cent);
        for (i = 0; i < nv; i++) {
            printf("%.6f\n", cent[i]);
        }
    }
#endif
    return 0;
}
