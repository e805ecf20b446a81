# PRNG, special functions, linear algebra, errors, logging, preflight
