"""Check the Monte Carlo engine against closed-form and brute-force oracles.

For 2-grams the permutation null is almost exactly the hypergeometric
null of Fisher's exact test; for tiny corpora every arrangement can be
enumerated outright.  Both give independent numbers the sampler must
reproduce.
"""

import math

from chancegram import (
    ContingencyTable2x2,
    PermutationPlan,
    enumerate_exact,
    extract,
    fisher_exact_upper,
    ingest_plain,
    run,
)

# --- brute force on a 4-token corpus -----------------------------------
stream = ingest_plain("a b a b")
key = (stream.vocab.id_of("a"), stream.vocab.id_of("b"))
p_exact = enumerate_exact(stream, key)
print(f"enumeration: P(f(ab) >= 2) over all arrangements of 'a b a b' = {p_exact:.6f}")
print("             (6 distinct arrangements, only 'a b a b' itself has two)")

plan = PermutationPlan(permutations=50_000, master_seed=5, lengths=(2,), min_freq=1)
tally = run(stream, plan, {2: extract(stream, 2, 1)})
p_mc = tally.exceedances[2][key] / plan.permutations
sigma = math.sqrt(p_exact * (1 - p_exact) / plan.permutations)
print(f"monte carlo: {p_mc:.6f} (about {abs(p_mc - p_exact) / sigma:.1f} sigma away)")
print()

# --- hypergeometric tail for a bigram ----------------------------------
text = ("x y " * 8 + "x q w e r t u i o p ") * 40
stream = ingest_plain(text)
key = (stream.vocab.id_of("x"), stream.vocab.id_of("y"))
observed = extract(stream, 2, 1).entries[key]
f1 = int(stream.vocab.freqs[key[0]])
f2 = int(stream.vocab.freqs[key[1]])
table = ContingencyTable2x2.from_margins(stream.total_tokens, f1, f2, observed)
print(f"bigram 'x y': O={observed}, f(x)={f1}, f(y)={f2}, N={stream.total_tokens}")
print(f"fisher exact upper tail: {fisher_exact_upper(table):.3e}")
print("(log-space tail sum; margins this large would overflow naive factorials)")
