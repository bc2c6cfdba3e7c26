"""Hand-transcribed oracle for the minipet metric battery.

Signatures, method-name tokens, call edges and traces below are copied by
hand from the Java sources; nothing is read from the Rust implementation.
Run: python3 metrics_oracle.py > metrics.json
"""
import json
import math
from itertools import combinations

# (class id, name, params, return) for every public method / constructor
PUBLIC = [
    (0, "Owner", ["String", "String"], "Owner"),
    (0, "getFirstName", [], "String"),
    (0, "getLastName", [], "String"),
    (1, "showOwner", ["String"], "String"),
    (1, "registerOwner", ["String", "String"], "String"),
    (2, "findByLastName", ["String"], "Owner"),
    (2, "save", ["Owner"], "void"),
    (3, "findOwner", ["String"], "Owner"),
    (3, "register", ["String", "String"], "Owner"),
    (3, "countPets", ["Owner"], "int"),
    (4, "Pet", ["String", "PetType"], "Pet"),
    (4, "getName", [], "String"),
    (4, "getOwner", [], "Owner"),
    (4, "setOwner", ["Owner"], "void"),
    (5, "findByOwner", ["Owner"], "List<Pet>"),
    (5, "save", ["Pet"], "void"),
    (6, "petsOf", ["Owner"], "List<Pet>"),
    (6, "adopt", ["Owner", "String", "PetType"], "Pet"),
    (7, "label", [], "String"),
    (8, "Visit", ["Pet", "String"], "Visit"),
    (8, "getPet", [], "Pet"),
    (8, "getDescription", [], "String"),
    (9, "bookVisit", ["Pet", "String"], "String"),
    (10, "findByPet", ["Pet"], "List<Visit>"),
    (10, "save", ["Visit"], "void"),
    (11, "schedule", ["Pet", "String"], "Visit"),
    (11, "history", ["Pet"], "List<Visit>"),
    (11, "adoptAndVisit", ["Owner", "String"], "Pet"),
]

# method-name tokens after splitting and stopword removal ("by", "of", "and")
TOKENS = {
    "Owner": {"owner"}, "getFirstName": {"get", "first", "name"},
    "getLastName": {"get", "last", "name"}, "showOwner": {"show", "owner"},
    "registerOwner": {"register", "owner"}, "findByLastName": {"find", "last", "name"},
    "save": {"save"}, "findOwner": {"find", "owner"}, "register": {"register"},
    "countPets": {"count", "pets"}, "Pet": {"pet"}, "getName": {"get", "name"},
    "getOwner": {"get", "owner"}, "setOwner": {"set", "owner"},
    "findByOwner": {"find", "owner"}, "petsOf": {"pets"}, "adopt": {"adopt"},
    "label": {"label"}, "Visit": {"visit"}, "getPet": {"get", "pet"},
    "getDescription": {"get", "description"}, "bookVisit": {"book", "visit"},
    "findByPet": {"find", "pet"}, "schedule": {"schedule"}, "history": {"history"},
    "adoptAndVisit": {"adopt", "visit"},
}

CALLS = [(1, 0, 3), (1, 3, 2), (3, 2, 2), (3, 6, 1), (6, 4, 1), (6, 5, 2),
         (9, 4, 1), (9, 8, 1), (9, 11, 1), (11, 6, 1), (11, 10, 2)]

SPLIT = [[0, 1, 2, 3, 4], [5, 6, 7], [8, 9, 10, 11]]

TRACES = {
    "register-owner": [1, 3, 2, 0],
    "adopt-pet": [11, 6, 5, 4, 7, 0],
    "book-visit": [9, 11, 10, 8, 4],
}


def jaccard(a, b):
    a, b = set(a), set(b)
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def cohesion(sim):
    per = []
    for service in SPLIT:
        ms = [m for m in PUBLIC if m[0] in service]
        if len(ms) < 2:
            per.append(1.0)
            continue
        pairs = list(combinations(ms, 2))
        per.append(sum(sim(x, y) for x, y in pairs) / len(pairs))
    return sum(per) / len(per)


chm = cohesion(lambda x, y: 0.5 * (jaccard(x[2], y[2]) + jaccard([x[3]], [y[3]])))
chd = cohesion(lambda x, y: jaccard(TOKENS[x[1]], TOKENS[y[1]]))

owner = {c: k for k, s in enumerate(SPLIT) for c in s}
crossing = sum(w for s, d, w in CALLS if owner[s] != owner[d])
icp = crossing / sum(w for _, _, w in CALLS)

entropies = []
for service in SPLIT:
    counts = [len(set(service) & set(cls)) for cls in TRACES.values()]
    total = sum(counts)
    h = 0.0
    for c in counts:
        if c:
            p = c / total
            h -= p * math.log(p)
    entropies.append(h)
bcp = sum(entropies) / len(entropies)

n = 12
ned = 1 - sum(len(s) for s in SPLIT if 5 <= len(s) <= 20) / n
cov = sum(len(s) for s in SPLIT) / n

print(json.dumps({"chm": chm, "chd": chd, "bcp": bcp, "icp": icp, "ned": ned, "cov": cov}, indent=2))
