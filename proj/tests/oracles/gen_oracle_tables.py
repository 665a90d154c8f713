#!/usr/bin/env python3
# Copyright 2026 The acnfa Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Regenerates tests/oracle_tables.hpp from mpmath at 50 significant digits.

The C++ tests only read the frozen header; this script documents where the
numbers come from and is not run by the build.
"""
import mpmath as mp

mp.mp.dps = 50


def fmt(v):
    if v == 0:
        return "0.0"
    return mp.nstr(v, 25, min_fixed=-1, max_fixed=-1)


def emit(name, cols, rows, out):
    out.append(f"inline constexpr {name}Row k{name}[] = {{")
    for r in rows:
        out.append("    {" + ", ".join(fmt(v) for v in r) + "},")
    out.append("};")
    out.append("")


LICENSE = [
    "// Copyright 2026 The acnfa Authors",
    "//",
    '// Licensed under the Apache License, Version 2.0 (the "License");',
    "// you may not use this file except in compliance with the License.",
    "// You may obtain a copy of the License at",
    "//",
    "//     http://www.apache.org/licenses/LICENSE-2.0",
    "//",
    "// Unless required by applicable law or agreed to in writing, software",
    '// distributed under the License is distributed on an "AS IS" BASIS,',
    "// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.",
    "// See the License for the specific language governing permissions and",
    "// limitations under the License.",
    "",
]


def main():
    out = LICENSE + [
        "// Generated by tests/oracles/gen_oracle_tables.py (mpmath, 50 digits). Do not edit.",
        "#pragma once",
        "",
        "namespace acnfa::oracle {",
        "",
        "struct LnGammaRow { double a; double value; };",
        "struct UpperGammaRow { double a; double x; double q; };",
        "struct ErfcRow { double x; double value; };",
        "struct NfaK1Row { double m; double nfa; };",
        "struct NfaK3Row { double m; double nfa; };",
        "",
    ]

    a_vals = [mp.mpf("0.001"), mp.mpf("0.01"), mp.mpf("0.1"), mp.mpf("0.25"), mp.mpf("0.5"),
              mp.mpf("0.75"), mp.mpf("0.999"), mp.mpf("1.001"), mp.mpf("1.5"), mp.mpf("1.999"),
              mp.mpf("2.001"), mp.mpf("2.5"), mp.mpf("3.7"), mp.mpf("7.25"), mp.mpf("10"),
              mp.mpf("33.3"), mp.mpf("100"), mp.mpf("1234.5"), mp.mpf("1e5"), mp.mpf("1e6")]
    emit("LnGamma", 2, [(a, mp.loggamma(a)) for a in a_vals], out)

    pairs = []
    for a in ["0.5", "1", "1.5", "2", "3.5", "5", "10", "25", "50"]:
        for x in ["0", "0.1", "1", "4.5", "20", "60", "200"]:
            pairs.append((mp.mpf(a), mp.mpf(x)))
    pairs += [(mp.mpf("0.5"), mp.mpf("4.5")), (mp.mpf("50"), mp.mpf("49")), (mp.mpf("50"), mp.mpf("51")),
              (mp.mpf("25"), mp.mpf("26")), (mp.mpf("7.5"), mp.mpf("8.5"))]
    emit("UpperGamma", 3, [(a, x, mp.gammainc(a, x, mp.inf, regularized=True)) for a, x in pairs], out)

    xs = [mp.mpf(s) for s in ["0", "1e-8", "0.01", "0.1", "0.25", "0.5", "0.75", "1", "1.25", "1.5",
                               "1.7", "2", "2.12132034355964257320253308631454711785450781", "2.5",
                               "3", "3.5", "4", "5", "6", "7", "8", "9", "10", "-0.5", "-1.7", "-3"]]
    emit("Erfc", 2, [(x, mp.erfc(x)) for x in xs], out)

    eta = mp.mpf(65536)
    ms = [mp.mpf(i) / 4 for i in range(0, 41, 2)] + [mp.mpf("11.5"), mp.mpf("17"), mp.mpf("25")]
    emit("NfaK1", 2, [(m, eta * mp.erfc(m / mp.sqrt(2))) for m in ms], out)

    # K=3, eta_test 4096: eta * Q(3/2, m^2/2)
    eta3 = mp.mpf(4096)
    ms3 = [mp.mpf(i) / 2 for i in range(0, 21)]
    emit("NfaK3", 2, [(m, eta3 * mp.gammainc(mp.mpf(1.5), m * m / 2, mp.inf, regularized=True)) for m in ms3], out)

    out.append("}  // namespace acnfa::oracle")
    print("\n".join(out))


if __name__ == "__main__":
    main()
