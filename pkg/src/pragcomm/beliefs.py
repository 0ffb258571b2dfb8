"""Belief state over candidates: exact literal updater and the learned network.

The literal updater is the ground truth for pretraining and for the oracle
baseline: a message is an attribute symbol, consistent candidates keep
their mass, inconsistent ones drop to a tiny floor. The learned network
reproduces this map after pretraining and is free to drift toward a
pragmatic reading during adaptive training.
"""

import numpy as np

from . import kernel
from .errors import ConfigError, NumericError
from .kernel import backend

CONSISTENCY_FLOOR = 1e-6   # likelihood of a message-inconsistent candidate
BELIEF_FLOOR = 1e-9        # additive floor before renormalizing a posterior


def uniform_belief(k):
    return np.full(k, 1.0 / k)


def is_valid_belief(b, tol=1e-9):
    b = np.asarray(b)
    return bool(np.all(b >= -tol) and abs(b.sum() - 1.0) <= max(tol, 1e-9 * b.size))


def literal_update(candidates, prior, message, floor=CONSISTENCY_FLOOR):
    """Exact Bayesian posterior under the 0/1-with-floor literal likelihood.

    candidates: K x V multi-hot matrix; prior: length-K belief; message: attribute id.
    """
    candidates = np.asarray(candidates, dtype=np.float64)
    prior = np.asarray(prior, dtype=np.float64)
    lik = np.where(candidates[:, message] > 0.5, 1.0, floor)
    un = prior * lik
    return un / un.sum()


def literal_posteriors_all(candidates, prior, floor=CONSISTENCY_FLOOR):
    """Literal posterior for every message at once: K x V matrix of columns."""
    candidates = np.asarray(candidates, dtype=np.float64)
    prior = np.asarray(prior, dtype=np.float64)
    lik = np.where(candidates > 0.5, 1.0, floor)
    un = prior[:, None] * lik
    return un / un.sum(axis=0, keepdims=True)


class BeliefNet:
    """Shared-candidate-encoder belief updater.

    The encoder applies the same linear map to every candidate row, mixes in
    the summed context, and repeats; the final K x M embedding is dotted
    with the one-hot message encoding and squashed to a likelihood, which
    multiplies the prior. The encoder never sees the prior or the message,
    so the whole map is permutation-equivariant over candidates by
    construction.
    """

    def __init__(self, vocab_size, message_count, rng, hidden=64, blocks=2,
                 store=None, prefix="enc"):
        if blocks < 1:
            raise ConfigError("encoder needs at least one block")
        self.vocab_size = vocab_size
        self.message_count = message_count
        self.hidden = hidden
        self.blocks = blocks
        self.prefix = prefix
        self.store = store if store is not None else kernel.ParamStore()
        in_dim = vocab_size
        for i in range(1, blocks + 1):
            out_dim = message_count if i == blocks else hidden
            kernel.add_linear(self.store, f"{prefix}{i}a", in_dim, hidden, rng)
            kernel.add_linear(self.store, f"{prefix}{i}b", 2 * hidden, out_dim, rng)
            in_dim = hidden

    def layer_names(self):
        names = []
        for i in range(1, self.blocks + 1):
            names += [f"{self.prefix}{i}a", f"{self.prefix}{i}b"]
        return names

    def arrays(self):
        """Current parameter values keyed by name (shared, not copied)."""
        return {n: self.store[n].data for n in self.store.names()}

    # fast (no-tape) path -------------------------------------------------

    def embed(self, candidates, params=None, block=None):
        """Candidate embeddings, K x M. ``params`` may be a snapshot dict.

        ``block`` sets the context-pooling group size when several games are
        stacked row-wise; by default the whole matrix is one game.
        """
        p = params if params is not None else self.arrays()
        B = backend.active
        x = np.ascontiguousarray(candidates, dtype=np.float64)
        k = block if block is not None else x.shape[0]
        for i in range(1, self.blocks + 1):
            h = B.sigmoid_fwd(B.ew_add(B.matmul_nn(x, p[f"{self.prefix}{i}a.w"]),
                                       p[f"{self.prefix}{i}a.b"]))
            ctx = B.block_repeat_rows(B.block_sum_rows(h, k), k)
            z = B.ew_add(B.matmul_nn(np.ascontiguousarray(np.concatenate([h, ctx], axis=1)),
                                     p[f"{self.prefix}{i}b.w"]),
                         p[f"{self.prefix}{i}b.b"])
            x = B.sigmoid_fwd(z) if i < self.blocks else z
        return x

    def likelihoods(self, embedding):
        """Per-candidate likelihood of every message: sigmoid of the embedding."""
        return backend.active.sigmoid_fwd(embedding)

    def update(self, candidates, prior, message, params=None, embedding=None):
        """Posterior belief after one message (fast path)."""
        if embedding is None:
            embedding = self.embed(candidates, params=params)
        lik = backend.active.sigmoid_fwd(
            np.ascontiguousarray(embedding[:, message].reshape(-1, 1)))
        un = np.asarray(prior).reshape(-1) * lik[:, 0] + BELIEF_FLOOR
        post = un / un.sum()
        if not np.all(np.isfinite(post)):
            raise NumericError("belief update produced non-finite posterior")
        return post

    def update_all(self, candidates, prior, params=None, embedding=None):
        """Posterior for every message at once: K x M (one column per message)."""
        if embedding is None:
            embedding = self.embed(candidates, params=params)
        lik = self.likelihoods(embedding)
        un = np.asarray(prior).reshape(-1, 1) * lik + BELIEF_FLOOR
        return un / un.sum(axis=0, keepdims=True)

    # tape path ------------------------------------------------------------

    def embed_tape(self, x_tensor, block):
        """Tape version of embed() for training; x rows are games x candidates."""
        st = self.store
        h = x_tensor
        for i in range(1, self.blocks + 1):
            a = kernel.sigmoid(kernel.linear_shared(st, f"{self.prefix}{i}a", h))
            ctx = kernel.block_repeat_rows(kernel.block_sum_rows(a, block), block)
            z = kernel.linear_shared(st, f"{self.prefix}{i}b", kernel.concat_cols(a, ctx))
            h = kernel.sigmoid(z) if i < self.blocks else z
        return h

    def posterior_tape(self, embedding, prior_col, row_messages, block):
        """Tape posterior: gather each row's message column, squash, reweight."""
        lik = kernel.sigmoid(kernel.gather_cols(embedding, row_messages))
        un = kernel.add(kernel.mul(prior_col, lik), kernel.constant([[BELIEF_FLOOR]]))
        z = kernel.block_repeat_rows(kernel.block_sum_rows(un, block), block)
        return kernel.div(un, z)

    def update_tape(self, candidates, prior, message):
        """Single-game tape posterior (column tensor), for loss building."""
        k = candidates.shape[0]
        x = kernel.constant(candidates)
        prior_col = kernel.constant(np.asarray(prior).reshape(-1, 1))
        e = self.embed_tape(x, k)
        return self.posterior_tape(e, prior_col, np.full(k, message, dtype=np.intp), k)


def net_update(net, candidates, prior, message):
    """Learned posterior; validates the input against the net's vocabulary."""
    candidates = np.asarray(candidates, dtype=np.float64)
    if candidates.shape[1] != net.vocab_size:
        raise ConfigError(
            f"candidate width {candidates.shape[1]} != net vocabulary {net.vocab_size}")
    if not 0 <= message < net.message_count:
        raise ConfigError(f"message {message} outside the net's message space")
    return net.update(candidates, prior, message)


def consistent_messages(candidate_matrix):
    """Attribute ids present in at least one candidate."""
    return np.flatnonzero(np.asarray(candidate_matrix).sum(axis=0) > 0.5)


def _sample_pretrain_batch(space, k, batch, rng):
    universe = space.instances()
    games, messages = [], []
    for _ in range(batch):
        picks = rng.choice(len(universe), size=k, replace=False)
        x = np.stack([universe[i].multi_hot(space.vocab_size) for i in picks])
        games.append(x)
        candidates_attrs = consistent_messages(x)
        messages.append(int(rng.choice(candidates_attrs)))
    return games, messages


def holdout_l1(net, pairs, floor=CONSISTENCY_FLOOR):
    """Mean L1 distance between learned and literal posteriors over (game, message) pairs."""
    total = 0.0
    for x, m in pairs:
        prior = uniform_belief(x.shape[0])
        q = net.update(x, prior, m)
        p = literal_update(x, prior, m, floor=floor)
        total += float(np.abs(q - p).sum())
    return total / len(pairs)


def pretrain_bayesian(net, space, num_steps, lr, k=4, batch=16, momentum=0.9,
                      holdout_pairs=1000, seed=0, floor=CONSISTENCY_FLOOR,
                      log_every=0, log_fn=None):
    """Fit the net to the exact literal updater with cross-entropy.

    Games are sampled uniformly from the space, priors are uniform, and the
    message is drawn uniformly among attributes consistent with at least one
    candidate. Returns a report dict including the final held-out mean L1.
    """
    rng = np.random.default_rng(seed)
    holdout_rng = np.random.default_rng((seed, 7919))
    games, messages = _sample_pretrain_batch(space, k, holdout_pairs, holdout_rng)
    holdout = list(zip(games, messages))

    for step_i in range(num_steps):
        xs, ms = _sample_pretrain_batch(space, k, batch, rng)
        x_stack = np.concatenate(xs, axis=0)
        row_msgs = np.repeat(np.asarray(ms, dtype=np.intp), k)
        prior_col = kernel.constant(np.full((batch * k, 1), 1.0 / k))
        targets = np.concatenate([
            literal_update(x, uniform_belief(k), m, floor=floor) for x, m in zip(xs, ms)
        ]).reshape(-1, 1)

        e = net.embed_tape(kernel.constant(x_stack), k)
        q = net.posterior_tape(e, prior_col, row_msgs, k)
        loss = kernel.scale(
            kernel.sum_all(kernel.mul(kernel.constant(targets), kernel.log_clamped(q))),
            -1.0 / batch)
        if not np.isfinite(loss.item()):
            raise NumericError(f"pretraining loss diverged at step {step_i}")
        loss.backward()
        net.store.sgd_step(lr, momentum=momentum)
        if log_every and log_fn and (step_i + 1) % log_every == 0:
            log_fn(step_i + 1, loss.item())

    return {
        "steps": num_steps,
        "holdout_pairs": holdout_pairs,
        "holdout_l1": holdout_l1(net, holdout, floor=floor),
    }
