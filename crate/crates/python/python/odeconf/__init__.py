"""Invariants, metrics and Lie-algebra checks for ODEs and Monge equations.

Each function returns the decoded JSON report of the Rust library. Keyword
arguments ``boxes`` (list of ``"sym:lo:hi"``), ``tol``, ``samples`` and
``seed`` control the sampling zero test.
"""

import json

from . import _odeconf

__version__ = _odeconf.__version__


def ode3_classify(f, **kw):
    return json.loads(_odeconf.ode3_classify(f, **kw))


def ode3_invariants(f, **kw):
    return json.loads(_odeconf.ode3_invariants_json(f, **kw))


def dkp(u, **kw):
    return json.loads(_odeconf.dkp(u, **kw))


def ode2_flatness(q, **kw):
    return json.loads(_odeconf.ode2_flatness(q, **kw))


def monge_classify(f, order, **kw):
    return json.loads(_odeconf.monge_classify(f, order, **kw))


def lie_verify(system):
    return json.loads(_odeconf.lie_verify(system))


def zero_test(expr, **kw):
    return json.loads(_odeconf.zero_test(expr, **kw))


def verify_paper(**kw):
    return json.loads(_odeconf.verify_paper(**kw))


__all__ = [
    "ode3_classify",
    "ode3_invariants",
    "dkp",
    "ode2_flatness",
    "monge_classify",
    "lie_verify",
    "zero_test",
    "verify_paper",
]
