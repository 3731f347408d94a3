"""Closed-form blow-up fields of the regularised system in both charts.

Two versions of each chart field live here:

* ``chart1_printed`` / ``chart2_printed`` reproduce the published closed
  forms symbol for symbol (only the lowercase ``r`` inside g3 is read as R).
* ``chart1_field`` / ``chart2_field`` are the corrected forms used by the
  library.  They differ from the printed ones by a handful of local edits,
  each pinned by a test against the chain-rule transport of the
  regularised field (see ``vectorfields.transported_chart_rhs``):

  - chart 1, m1 component: the m2² term carries a minus sign;
  - chart 1, f3: the term 4 r⁸ sin⁴q1 sin q2 cos²q2 reads -2 r⁴ sin²q1 sin q2 cos²q2;
  - chart 1, f5: the printed expression equals sin(q1) times the true one;
  - chart 2, m1 component: the R³ sin²Q1 cos³Q2 term carries a minus sign.

The corrected forms factor one power of the radial variable out
explicitly, so the divided field (raw field / radial) stays smooth at 0.
All functions broadcast over numpy arrays.
"""

from __future__ import annotations

import numpy as np


# --- Verbatim transcriptions ---

def chart1_printed(m1, m2, r, q1, q2):
    """Raw chart-1 field (m1', m2', r', q1', q2') exactly as published."""
    s1, c1, s2, c2 = np.sin(q1), np.cos(q1), np.sin(q2), np.cos(q2)
    dm1 = ((r**3 * c1**2 + m2**2 * r) * c2 * s1 + 2 * c1 * m2) * r
    dm2 = r * (s2 * c1**3 * c2 * r**3 - (r**3 * c2 * s2 + 2 * m1) * c1 + s1 * c2 * m1 * m2 * r)
    f3 = 1 / (-1 + (c1**2 - 1) * c2**2) * (r**2 * s1 * (
        s1**3 * r**4 * c2**3 * ((m2 * r * c1 + 1) * s2 + r * m1 * s1)
        + 4 * r**8 * s1**4 * s2 * c2**2 + (m1 * r + s1 * s2) * c2 - 2 * s2))
    f4 = -r / (1 + s1**2 * c2**2) * (
        (m2 * r**4 * s1 * s2 * c1**2 - m1 * r**4 * c1**3 + (m1 * (r**4 - 1) + r**3 * s1 * s2) * c1
         + m2 * s2 * s1) * r * s1**2 * c2**3
        - 2 * r**4 * c1 * s1**2 * s2 * c2**2 + s1 * s2 * (m2 * r + c1) * c2 - 2 * s2 * c1)
    f5 = c2 * r / (1 + s1**2 * c2**2) * (
        2 - 2 * r**4 * s1**6 * c2**4
        + (m1 * r**4 * c1**4 * s2 - m2 * r**4 * s1 * c1**3 + (-2 * m1 * r**4 * s2 - r**3 * s1) * c1**2
           + (2 * r**4 + 1) * s1 * m2 * c1 + r**3 * (m1 * r * s2 + 2 * s1)) * (c1 + 1) * r * (c1 - 1) * c2**3
        + (-2 * c1**4 + (-2 * r**4 + 4) * c1**2 + 2 * r**4 - 2) * c2**2
        + ((m1 * r * s2 + s1) * c1**2 - m2 * r * s1 * c1 - m1 * r * s2 - 2 * s1) * c2)
    return dm1, dm2, f3, f4, f5


def chart2_printed(m1, m2, R, Q1, Q2):
    """Raw chart-2 field (m1', m2', R', Q1', Q2') exactly as published."""
    s1, c1, s2, c2 = np.sin(Q1), np.cos(Q1), np.sin(Q2), np.cos(Q2)
    dm1 = s1 * R * (R**3 * s1**2 * c2**3 - R * (R**2 * c1**2 + m2**2 - R**2) * c2 + 2 * m2 * s2)
    dm2 = -R * (2 * s2 * m1 + R * (R**2 * s1 * s2 * c1 - m1 * m2) * c2) * s1
    g3 = -R**2 / (1 + s1**2 * c2**2) * (
        m1 * R**5 * s1 * s1**4 * c2**5
        + R**4 * c1 * s1**2 * (-m2 * R * c1**2 * s2 + m1 * R * c1 * s1 + m2 * R * s2 + s1) * c2**3
        + (2 * R**4 * c1**3 - 2 * R**4 * c1) * c2**2 + s1 * (m1 * R + c1) * c2 - 2 * c1)
    g4 = -R * s1 / (1 + s1**2 * c2**2) * (
        2 - 2 * R**4 * s1**4 * c2**6 - R**4 * s1**2 * (m2 * R * s1**2 * s2 + s1) * c2**5
        + (2 * c1**2 - 2) * c2**4
        + (R**4 * c1**2 - R**4 - 1) * (-m2 * R * c1**2 * s2 + m1 * R * c1 * s1 + m2 * R * s2 + s1) * c2**3
        + 2 * R**4 * s1**2 * c2**2 + (-m2 * R * s2 - s1) * c2)
    g5 = R * c2**2 / (1 + s1**2 * c2**2) * (
        m2 * R**5 * c1 * s1**4 * c2**4 - 2 * R**4 * c1 * s2 * s1**4 * c2**3
        - R * s1**2 * c2**2 * (-m2 * R**4 * c1**3 + m1 * R**4 * c1**2 * s1 * s2
                                + (m2 * R**4 + R**3 * s1 * s2 - m2) * c1 - m1 * R**4 * s1 * s2)
        + (2 * c1**3 * s2 - 2 * c1 * s2) * c2 + (m2 * R - s1 * s2) * c1 - s1 * s2 * m1 * R)
    return dm1, dm2, g3, g4, g5


# --- Corrected forms, radial factor pulled out ---

def chart1_field(m1, m2, r, q1, q2, divided: bool = True):
    """Chart-1 field in (m1, m2, r, q1, q2); ``divided`` removes one factor of r."""
    s1, c1, s2, c2 = np.sin(q1), np.cos(q1), np.sin(q2), np.cos(q2)
    den = 1 + s1**2 * c2**2
    a1 = (r**3 * c1**2 - m2**2 * r) * c2 * s1 + 2 * c1 * m2
    a2 = s2 * c1**3 * c2 * r**3 - (r**3 * c2 * s2 + 2 * m1) * c1 + s1 * c2 * m1 * m2 * r
    b3 = -r * s1 * (
        s1**3 * r**4 * c2**3 * ((m2 * r * c1 + 1) * s2 + r * m1 * s1)
        - 2 * r**4 * s1**2 * s2 * c2**2 + (m1 * r + s1 * s2) * c2 - 2 * s2) / den
    b4 = -(
        (m2 * r**4 * s1 * s2 * c1**2 - m1 * r**4 * c1**3 + (m1 * (r**4 - 1) + r**3 * s1 * s2) * c1
         + m2 * s2 * s1) * r * s1**2 * c2**3
        - 2 * r**4 * c1 * s1**2 * s2 * c2**2 + s1 * s2 * (m2 * r + c1) * c2 - 2 * s2 * c1) / den
    b5 = c2 / (den * s1) * (
        2 - 2 * r**4 * s1**6 * c2**4
        + (m1 * r**4 * c1**4 * s2 - m2 * r**4 * s1 * c1**3 + (-2 * m1 * r**4 * s2 - r**3 * s1) * c1**2
           + (2 * r**4 + 1) * s1 * m2 * c1 + r**3 * (m1 * r * s2 + 2 * s1)) * (c1 + 1) * r * (c1 - 1) * c2**3
        + (-2 * c1**4 + (-2 * r**4 + 4) * c1**2 + 2 * r**4 - 2) * c2**2
        + ((m1 * r * s2 + s1) * c1**2 - m2 * r * s1 * c1 - m1 * r * s2 - 2 * s1) * c2)
    out = (a1, a2, b3, b4, b5)
    return out if divided else tuple(r * v for v in out)


def chart2_field(m1, m2, R, Q1, Q2, divided: bool = True):
    """Chart-2 field in (m1, m2, R, Q1, Q2); ``divided`` removes one factor of R."""
    s1, c1, s2, c2 = np.sin(Q1), np.cos(Q1), np.sin(Q2), np.cos(Q2)
    den = 1 + s1**2 * c2**2
    a1 = s1 * (-R**3 * s1**2 * c2**3 - R * (R**2 * c1**2 + m2**2 - R**2) * c2 + 2 * m2 * s2)
    a2 = -(2 * s2 * m1 + R * (R**2 * s1 * s2 * c1 - m1 * m2) * c2) * s1
    b3 = -R / den * (
        m1 * R**5 * s1**5 * c2**5
        + R**4 * c1 * s1**2 * (-m2 * R * c1**2 * s2 + m1 * R * c1 * s1 + m2 * R * s2 + s1) * c2**3
        + (2 * R**4 * c1**3 - 2 * R**4 * c1) * c2**2 + s1 * (m1 * R + c1) * c2 - 2 * c1)
    b4 = -s1 / den * (
        2 - 2 * R**4 * s1**4 * c2**6 - R**4 * s1**2 * (m2 * R * s1**2 * s2 + s1) * c2**5
        + (2 * c1**2 - 2) * c2**4
        + (R**4 * c1**2 - R**4 - 1) * (-m2 * R * c1**2 * s2 + m1 * R * c1 * s1 + m2 * R * s2 + s1) * c2**3
        + 2 * R**4 * s1**2 * c2**2 + (-m2 * R * s2 - s1) * c2)
    b5 = c2**2 / den * (
        m2 * R**5 * c1 * s1**4 * c2**4 - 2 * R**4 * c1 * s2 * s1**4 * c2**3
        - R * s1**2 * c2**2 * (-m2 * R**4 * c1**3 + m1 * R**4 * c1**2 * s1 * s2
                                + (m2 * R**4 + R**3 * s1 * s2 - m2) * c1 - m1 * R**4 * s1 * s2)
        + (2 * c1**3 * s2 - 2 * c1 * s2) * c2 + (m2 * R - s1 * s2) * c1 - s1 * s2 * m1 * R)
    out = (a1, a2, b3, b4, b5)
    return out if divided else tuple(R * v for v in out)


def chart1_divisor_printed(m1, m2, q1, q2):
    """The published divided chart-1 field restricted to r = 0."""
    s1, c1, s2, c2 = np.sin(q1), np.cos(q1), np.sin(q2), np.cos(q2)
    den = 1 + s1**2 * c2**2
    return (
        2 * c1 * m2,
        -2 * c1 * m1,
        np.zeros_like(s1 * s2),
        -s2 * c1 * (s1 * c2 - 2) / den,
        -c2 * (2 * s1**4 * c2**2 - 2 + (2 - c1**2) * s1 * c2) / (den * s1),
    )
