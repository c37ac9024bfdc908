from enum import Enum


class Site(str, Enum):
    A = "A"
    B = "B"
    C = "C"


class Sign(str, Enum):
    plus  = "+"
    minus = "-"


class Scenario(str, Enum):
    symmetric   = "symmetric"     # eta1 = eta2 = eta3 = eta
    one_perfect = "one-perfect"   # eta1 = 1, eta2 = eta3 = eta
    two_perfect = "two-perfect"   # eta1 = eta2 = 1, eta3 free
    frontier    = "frontier"      # eta1 = 1, eta2 scanned against minimal eta3


class SettingsMode(str, Enum):
    fixed    = "fixed"
    optimize = "optimize"


class SearchSpace(str, Enum):
    sphere   = "sphere"
    xy_plane = "xy-plane"


class SweepFamily(str, Enum):
    eprime           = "eprime"
    violation_factor = "violation-factor"


class Preset(str, Enum):
    mabk = "mabk"
    pi5  = "pi5"
    ci6  = "ci6"


SITES = (Site.A, Site.B, Site.C)
