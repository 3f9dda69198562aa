"""Exact values and prime labels: the arithmetic behind grouping.

Values live in the rationals extended with square roots of primes, kept in
normal form (squarefree radical keys, no zero coefficients).  Groups get
labels 1, sqrt2, sqrt3, ...; a sum of label-tagged values can be decoded
exactly per group because the labels are rationally independent.
"""

from fractions import Fraction

from cubealg.exactnum import EV_ONE, ExactValue, LabelAllocator, project_value

EV = ExactValue
sqrt = EV.sqrt_of

# Arithmetic stays symbolic: no radical is ever evaluated numerically.
print("sqrt2 * sqrt7 =", sqrt(2) * sqrt(7))
print("sqrt2 * sqrt2 =", sqrt(2) * sqrt(2))
print("(1 + sqrt2) * sqrt3 =", (EV_ONE + sqrt(2)) * sqrt(3))

value = (sqrt(3) + sqrt(5) + sqrt(14) + sqrt(22)).scale(Fraction(1000))
print("scaled sum:", value)
print("normalized:", value.quot(EV.rational(1000)))

# The allocator hands out 1 first, then fresh prime radicals, and never
# repeats: two labelings drawn from one session cannot collide.
alloc = LabelAllocator()
countries, alloc = alloc.allocate(2)
cities, alloc = alloc.allocate(4)
print("\ncountry labels:", [str(l) for l in countries])
print("city labels:   ", [str(l) for l in cities])

# Tag each city's value with (country label * city label) and sum; that one
# number still knows every addend.
city_of = {"antwerp": 0, "brussels": 1, "paris": 2, "marseille": 3}
country_of = {"antwerp": 0, "brussels": 0, "paris": 1, "marseille": 1}
sales = {"antwerp": Fraction(10), "brussels": Fraction(20),
         "paris": Fraction(30), "marseille": Fraction(40)}

total = EV.rational(0)
for city, amount in sales.items():
    label = countries[country_of[city]] * cities[city_of[city]]
    total = total + label.scale(amount)
print("\ntagged total:", total)

city_primes = {l.label_key() for l in cities if l.label_key() != 1}
for city in sales:
    label = countries[country_of[city]] * cities[city_of[city]]
    decoded = project_value(total, label, city_primes | {2})
    print(f"decoded {city}: {decoded}")
