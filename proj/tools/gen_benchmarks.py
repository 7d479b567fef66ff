#!/usr/bin/env python3
"""Regenerates the pinned benchmark corpus under benchmarks/.

Input data is derived from fixed formulas (Knuth MMIX LCG streams, a fixed
pixel formula) that the C++ test oracles reproduce independently.
"""

import os

OUT = os.path.join(os.path.dirname(__file__), "..", "benchmarks")

MASK = (1 << 64) - 1


class Lcg:
    def __init__(self, seed):
        self.x = seed

    def next(self, range_):
        self.x = (self.x * 6364136223846793005 + 1442695040888963407) & MASK
        return (self.x >> 33) % range_


def int_matrix_literal(rows, indent="    "):
    lines = []
    for i, row in enumerate(rows):
        sep = "," if i + 1 < len(rows) else ""
        lines.append(indent + "    [" + ", ".join(str(v) for v in row) + "]" + sep)
    return "[\n" + "\n".join(lines) + "\n" + indent + "]"


def float_matrix_literal(rows, indent="    "):
    lines = []
    for i, row in enumerate(rows):
        sep = "," if i + 1 < len(rows) else ""
        lines.append(indent + "    [" + ", ".join(repr(v) for v in row) + "]" + sep)
    return "[\n" + "\n".join(lines) + "\n" + indent + "]"


FIB = """\
// Recursive Fibonacci; fib(17) = 1597.
decl fib(n) {
    if (n <= 2) {
        return 1;
    }
    return fib(n - 1) + fib(n - 2);
}

decl main() {
    print(fib(17));
}

main();
"""

FIB_ITER = """\
// Iterative Fibonacci; register-equivalent to the recursive version.
decl fib_iter(n) {
    var a = 0;
    var b = 1;
    var k = 0;
    while (k < n) {
        var t = a + b;
        a = b;
        b = t;
        k = k + 1;
    }
    return a;
}

decl main() {
    print(fib_iter(98));
}

main();
"""

MERGE_SORT = """\
// Bottom of the worst case: a reverse-sorted vector of 142 elements.
decl merge(a, b) {
    var out = [];
    while (0 < lenof(a)) {
        if (0 < lenof(b)) {
            if (a[0] <= b[0]) {
                out = out + [a[0]];
                a = a[1:];
            } else {
                out = out + [b[0]];
                b = b[1:];
            }
        } else {
            out = out + [a[0]];
            a = a[1:];
        }
    }
    return out + b;
}

decl msort(v) {
    if (lenof(v) <= 1) {
        return v;
    }
    var mid = lenof(v) / 2;
    return merge(msort(v[:mid]), msort(v[mid:]));
}

decl main() {
    var v = [];
    var k = 142;
    while (0 < k) {
        v = v + [k];
        k = k - 1;
    }
    print(msort(v));
}

main();
"""

MATMUL = """\
// 11x11 integer matrix product C = A * B.
decl matmul(a, b, n) {
    var c = [];
    var i = 0;
    while (i < n) {
        var row = [];
        var j = 0;
        while (j < n) {
            var total = 0;
            var k = 0;
            while (k < n) {
                total = total + a[i][k] * b[k][j];
                k = k + 1;
            }
            row = row + [total];
            j = j + 1;
        }
        c = c + [row];
        i = i + 1;
    }
    return c;
}

decl main() {
    var a = %(a)s;
    var b = %(b)s;
    print(matmul(a, b, 11));
}

main();
"""

FLOYD = """\
// All-pairs shortest paths on a 13x13 complete weighted digraph.
decl floyd(d, n) {
    var k = 0;
    while (k < n) {
        var i = 0;
        while (i < n) {
            var j = 0;
            while (j < n) {
                if (d[i][k] + d[k][j] < d[i][j]) {
                    d[i][j] = d[i][k] + d[k][j];
                }
                j = j + 1;
            }
            i = i + 1;
        }
        k = k + 1;
    }
    return d;
}

decl main() {
    var w = %(w)s;
    print(floyd(w, 13));
}

main();
"""

LANCZOS = """\
// Lanczos-2 downsample of a fixed 5x5 grayscale image to 3x3.
decl msin(x) {
    var pi = 3.141592653589793;
    var u = x;
    var sign = 1.0;
    if (u < 0.0) {
        u = 0.0 - u;
        sign = 0.0 - sign;
    }
    while (pi < u) {
        u = u - (2.0 * pi);
        if (u < 0.0) {
            u = 0.0 - u;
            sign = 0.0 - sign;
        }
    }
    var term = u;
    var total = u;
    var k = 1.0;
    while (k <= 8.0) {
        term = (0.0 - (term * u * u)) / ((2.0 * k) * (2.0 * k + 1.0));
        total = total + term;
        k = k + 1.0;
    }
    return sign * total;
}

decl lanczos2(t) {
    var pi = 3.141592653589793;
    var u = t;
    if (u < 0.0) {
        u = 0.0 - u;
    }
    if (u == 0.0) {
        return 1.0;
    }
    if (2.0 <= u) {
        return 0.0;
    }
    var px = pi * u;
    var half = px / 2.0;
    return (msin(px) / px) * (msin(half) / half);
}

decl main() {
    var src = %(img)s;
    var scale = 5.0 / 3.0;
    var out = [];
    var oy = 0;
    while (oy < 3) {
        var row = [];
        var ox = 0;
        while (ox < 3) {
            var sy = (oy + 0.5) * scale - 0.5;
            var sx = (ox + 0.5) * scale - 0.5;
            var fy = 0;
            while (fy + 1 <= sy) {
                fy = fy + 1;
            }
            var fx = 0;
            while (fx + 1 <= sx) {
                fx = fx + 1;
            }
            var total = 0.0;
            var wsum = 0.0;
            var ky = fy - 1;
            while (ky <= fy + 2) {
                var kx = fx - 1;
                while (kx <= fx + 2) {
                    var wy = lanczos2(sy - ky);
                    var wx = lanczos2(sx - kx);
                    var w = wy * wx;
                    var py = ky;
                    if (py < 0) {
                        py = 0;
                    }
                    if (4 < py) {
                        py = 4;
                    }
                    var px = kx;
                    if (px < 0) {
                        px = 0;
                    }
                    if (4 < px) {
                        px = 4;
                    }
                    total = total + src[py][px] * w;
                    wsum = wsum + w;
                    kx = kx + 1;
                }
                ky = ky + 1;
            }
            row = row + [total / wsum];
            ox = ox + 1;
        }
        out = out + [row];
        oy = oy + 1;
    }
    print(out);
}

main();
"""


def main():
    os.makedirs(OUT, exist_ok=True)

    lcg = Lcg(0x5EED0001)
    a = [[lcg.next(10) for _ in range(11)] for _ in range(11)]
    b = [[lcg.next(10) for _ in range(11)] for _ in range(11)]

    lcg = Lcg(0x5EED0002)
    w = [[0 if i == j else 1 + lcg.next(20) for j in range(13)] for i in range(13)]

    img = [[((i * 31 + j * 17 + 7) % 97) / 96.0 for j in range(5)] for i in range(5)]

    files = {
        "fib.mona": FIB,
        "fib_iter.mona": FIB_ITER,
        "merge_sort.mona": MERGE_SORT,
        "matmul.mona": MATMUL % {"a": int_matrix_literal(a), "b": int_matrix_literal(b)},
        "floyd_warshall.mona": FLOYD % {"w": int_matrix_literal(w)},
        "lanczos.mona": LANCZOS % {"img": float_matrix_literal(img)},
    }
    for name, text in files.items():
        with open(os.path.join(OUT, name), "w") as f:
            f.write(text)
        print("wrote", name)


if __name__ == "__main__":
    main()
