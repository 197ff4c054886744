"""Generated C support sources.

aw_runtime.c/.h: monotonic timing, knob reading (environment overrides a
name=value knob file), and the local metric feed woven dispatch code
reports into. aw_memo_<fn>.c/.h: a direct-mapped argument->result table
specialized per memoized function (size, conflict policy, types).
"""

AW_RUNTIME_H = """\
#ifndef AW_RUNTIME_H
#define AW_RUNTIME_H

/* Monotonic wall clock in microseconds. */
double aw_now_us(void);

/* Knob protocol: an environment variable named like the knob wins, then a
 * name=value line in the knob file ($AW_KNOB_FILE, default aw_knobs.txt),
 * then the given default. */
int aw_knob_read(const char *name, int defval);
void aw_knobs_refresh(void);

/* Local metric feed: lines appended to $AW_METRIC_FEED, silent when unset. */
void aw_feed_call(const char *knob, int value, const char *version,
                  double time_us);
void aw_feed_oob(const char *knob, int value);

#endif /* AW_RUNTIME_H */
"""

AW_RUNTIME_C = """\
#define _POSIX_C_SOURCE 199309L
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include <time.h>

#include "aw_runtime.h"

double aw_now_us(void) {
    struct timespec ts;
    clock_gettime(CLOCK_MONOTONIC, &ts);
    return (double)ts.tv_sec * 1e6 + (double)ts.tv_nsec / 1e3;
}

#define AW_MAX_KNOBS 64

static char aw_knob_names[AW_MAX_KNOBS][64];
static int aw_knob_values[AW_MAX_KNOBS];
static int aw_knob_count;
static int aw_knobs_loaded;

static void aw_load_knob_file(void) {
    const char *path = getenv("AW_KNOB_FILE");
    FILE *f;
    char line[128];
    aw_knob_count = 0;
    aw_knobs_loaded = 1;
    if (path == NULL) {
        path = "aw_knobs.txt";
    }
    f = fopen(path, "r");
    if (f == NULL) {
        return; /* missing file: every knob falls back to its default */
    }
    while (fgets(line, sizeof line, f) != NULL && aw_knob_count < AW_MAX_KNOBS) {
        char *eq = strchr(line, '=');
        size_t n;
        if (eq == NULL) {
            continue;
        }
        n = (size_t)(eq - line);
        if (n >= sizeof aw_knob_names[0]) {
            n = sizeof aw_knob_names[0] - 1;
        }
        memcpy(aw_knob_names[aw_knob_count], line, n);
        aw_knob_names[aw_knob_count][n] = '\\0';
        aw_knob_values[aw_knob_count] = atoi(eq + 1);
        aw_knob_count++;
    }
    fclose(f);
}

void aw_knobs_refresh(void) {
    aw_load_knob_file();
}

int aw_knob_read(const char *name, int defval) {
    const char *env = getenv(name);
    int i;
    if (env != NULL && env[0] != '\\0') {
        return atoi(env);
    }
    if (!aw_knobs_loaded) {
        aw_load_knob_file();
    }
    for (i = 0; i < aw_knob_count; i++) {
        if (strcmp(aw_knob_names[i], name) == 0) {
            return aw_knob_values[i];
        }
    }
    return defval;
}

static FILE *aw_feed_stream(void) {
    static FILE *stream;
    static int checked;
    if (!checked) {
        const char *path = getenv("AW_METRIC_FEED");
        checked = 1;
        if (path != NULL && path[0] != '\\0') {
            stream = fopen(path, "a");
        }
    }
    return stream;
}

void aw_feed_call(const char *knob, int value, const char *version,
                  double time_us) {
    FILE *f = aw_feed_stream();
    if (f != NULL) {
        fprintf(f, "event=call knob=%s value=%d version=%s time_us=%.3f\\n",
                knob, value, version, time_us);
        fflush(f);
    }
}

void aw_feed_oob(const char *knob, int value) {
    FILE *f = aw_feed_stream();
    if (f != NULL) {
        fprintf(f, "event=knob_oob knob=%s value=%d\\n", knob, value);
        fflush(f);
    }
}
"""


def runtime_sources():
    return {"aw_runtime.h": AW_RUNTIME_H, "aw_runtime.c": AW_RUNTIME_C}


_MEMO_H = """\
#ifndef AW_MEMO_{FN}_H
#define AW_MEMO_{FN}_H

extern int {fn}_memo_enabled;   /* 0 stops memoization at run time */
extern int {fn}_memo_policy;    /* 0 = REPLACE on conflict, 1 = KEEP */

{ret} {fn}_wrapper({param_list});
void {fn}_memo_stats(unsigned long *hits, unsigned long *misses,
                     unsigned long *evictions);

#endif /* AW_MEMO_{FN}_H */
"""

_MEMO_C = """\
#include <stdlib.h>
#include <string.h>

#include "aw_memo_{fn}.h"

extern {ret} {fn}({type_list});

int {fn}_memo_enabled = {enabled};
int {fn}_memo_policy = {policy};

#define AW_MEMO_SIZE_{FN} {size}

static struct {{
    int valid;
    {arg} args[{argc}];
    {ret} result;
}} aw_table_{fn}[AW_MEMO_SIZE_{FN}];

static unsigned long aw_hits_{fn};
static unsigned long aw_misses_{fn};
static unsigned long aw_evictions_{fn};
static int aw_env_read_{fn};

static void aw_read_env_{fn}(void) {{
    const char *v;
    if (aw_env_read_{fn}) {{
        return;
    }}
    aw_env_read_{fn} = 1;
    v = getenv("AW_{FN}_MEMO_ENABLED");
    if (v != NULL && v[0] != '\\0') {{
        {fn}_memo_enabled = atoi(v);
    }}
    v = getenv("AW_{FN}_MEMO_POLICY");
    if (v != NULL && v[0] != '\\0') {{
        {fn}_memo_policy = atoi(v);
    }}
}}

/* FNV-1a over the raw argument bytes, masked to the table size. */
static unsigned long aw_slot_{fn}(const {arg} *key) {{
    const unsigned char *p = (const unsigned char *)key;
    unsigned long h = 1469598103934665603UL;
    size_t i;
    for (i = 0; i < sizeof({arg}) * {argc}; i++) {{
        h ^= (unsigned long)p[i];
        h *= 1099511628211UL;
    }}
    return h & (AW_MEMO_SIZE_{FN} - 1);
}}

{ret} {fn}_wrapper({param_list}) {{
    {arg} key[{argc}];
    unsigned long slot;
    {ret} r;
    aw_read_env_{fn}();
    if (!{fn}_memo_enabled) {{
        return {fn}({arg_names});
    }}
{key_fill}
    slot = aw_slot_{fn}(key);
    if (aw_table_{fn}[slot].valid &&
        memcmp(aw_table_{fn}[slot].args, key, sizeof key) == 0) {{
        aw_hits_{fn}++;
        return aw_table_{fn}[slot].result;
    }}
    aw_misses_{fn}++;
    r = {fn}({arg_names});
    if (!aw_table_{fn}[slot].valid) {{
        aw_table_{fn}[slot].valid = 1;
        memcpy(aw_table_{fn}[slot].args, key, sizeof key);
        aw_table_{fn}[slot].result = r;
    }} else if ({fn}_memo_policy == 0) {{
        aw_evictions_{fn}++;
        memcpy(aw_table_{fn}[slot].args, key, sizeof key);
        aw_table_{fn}[slot].result = r;
    }}
    return r;
}}

void {fn}_memo_stats(unsigned long *hits, unsigned long *misses,
                     unsigned long *evictions) {{
    if (hits != NULL) {{
        *hits = aw_hits_{fn};
    }}
    if (misses != NULL) {{
        *misses = aw_misses_{fn};
    }}
    if (evictions != NULL) {{
        *evictions = aw_evictions_{fn};
    }}
}}
"""


def memo_sources(fn, arg_type, ret_type, arg_count, table_size, policy,
                 enabled=True):
    """Render the memo table pair for one function.

    policy: "REPLACE" or "KEEP"; table_size must be a power of two.
    """
    arg_names = ", ".join(f"a{i}" for i in range(arg_count))
    param_list = ", ".join(f"{arg_type} a{i}" for i in range(arg_count))
    key_fill = "\n".join(f"    key[{i}] = a{i};" for i in range(arg_count))
    fields = dict(
        fn=fn, FN=fn.upper(), ret=ret_type, arg=arg_type, argc=arg_count,
        size=table_size, policy=0 if policy == "REPLACE" else 1,
        enabled=1 if enabled else 0, arg_names=arg_names,
        param_list=param_list, type_list=", ".join([arg_type] * arg_count),
        key_fill=key_fill,
    )
    return {
        f"aw_memo_{fn}.h": _MEMO_H.format(**fields),
        f"aw_memo_{fn}.c": _MEMO_C.format(**fields),
    }
