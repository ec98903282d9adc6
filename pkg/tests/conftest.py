import random

import pytest

from vnetchat.model import (Datacenter, Link, ServiceParams, Topology, User,
                            Weights)


def make_topology(routers, links, dcs):
    return Topology(
        routers=frozenset(routers),
        links=tuple(Link(*l) for l in links),
        datacenters=tuple(Datacenter(*d) for d in dcs),
    )


@pytest.fixture
def two_router():
    """One link 1->2 (1.0 Gbps / 1.0 ms), one DC at router 2 (4 cores)."""
    return make_topology([1, 2], [(1, 1, 2, 1.0, 1.0)], [(1, 2, 4.0)])


@pytest.fixture
def diamond():
    """Two 2-hop routes 1->4 via 2 and via 3, unit latencies."""
    return make_topology(
        [1, 2, 3, 4],
        [(1, 1, 2, 1.0, 1.0), (2, 2, 4, 1.0, 1.0),
         (3, 1, 3, 1.0, 1.0), (4, 3, 4, 1.0, 1.0)],
        [(1, 4, 4.0)])


DEFAULT_WEIGHTS = Weights(1.0, 0.01, 0.05)


def random_instance(seed):
    """Small random instance: <=6 routers, <=10 directed links, <=2 DCs,
    <=2 users, random bounds."""
    rng = random.Random(seed)
    n = rng.randint(2, 6)
    routers = list(range(1, n + 1))
    n_links = rng.randint(1, 10)
    links = []
    for i in range(n_links):
        src, dst = rng.sample(routers, 2)
        links.append(Link(i + 1, src, dst,
                          rng.choice([0.5, 1.0, 2.0]),
                          rng.choice([0.5, 1.0, 2.0])))
    dcs = [Datacenter(d + 1, rng.choice(routers), rng.uniform(1.0, 5.0))
           for d in range(rng.randint(1, 2))]
    t = Topology(routers=frozenset(routers), links=tuple(links),
                 datacenters=tuple(dcs))
    users = [User(u + 1, rng.choice(routers), rng.uniform(0.0, 1.2))
             for u in range(rng.randint(1, 2))]
    params = {u.id: ServiceParams(cpu_param=rng.uniform(0.5, 3.0),
                                  latency_bound=rng.uniform(0.5, 4.0))
              for u in users}
    prev = {}
    if rng.random() < 0.5:
        for u in users:
            if rng.random() < 0.7:
                prev[u.id] = rng.choice(dcs).id
    w = Weights(1.0, 0.01, 0.05) if rng.random() < 0.5 else \
        Weights(rng.uniform(0.1, 2.0), rng.uniform(0.0, 0.1), rng.uniform(0.0, 0.2))
    return t, users, params, prev, w
