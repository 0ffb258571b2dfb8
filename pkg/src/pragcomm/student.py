"""Student agent: belief-driven pick-or-wait policy trained by REINFORCE.

The action distribution spreads (1 - w) of the mass over the posterior
belief and keeps w for the wait action, where w comes from a learned
linear gate read off the belief in sorted order (sorting makes the gate
insensitive to candidate position while staying a linear map of the
belief vector).
"""

import logging
from dataclasses import dataclass

import numpy as np

from . import kernel
from .beliefs import BeliefNet
from .errors import ConfigError, ProtocolError
from .kernel import backend

log = logging.getLogger(__name__)


@dataclass
class EpisodeStepRecord:
    """One trajectory step, all arrays in the student's presentation order."""

    candidates: np.ndarray   # K x V multi-hot
    prior: np.ndarray        # belief before the message
    message: int
    action: int              # 0..K-1 picks a candidate, K is the wait action
    reward: float


def returns(rewards, gamma):
    """Discounted suffix sums R_t = sum_k gamma^(k-t) r_k."""
    rewards = [r.reward if isinstance(r, EpisodeStepRecord) else float(r) for r in rewards]
    if not rewards:
        raise ProtocolError("returns() on an empty episode")
    out = np.zeros(len(rewards))
    acc = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        acc = rewards[t] + gamma * acc
        out[t] = acc
    return out


class StudentModel:
    """Belief updater plus wait gate; the target identity never enters."""

    def __init__(self, vocab_size, message_count, k, rng, hidden=64, blocks=2):
        if k < 2:
            raise ConfigError("student needs at least two candidates")
        self.vocab_size = vocab_size
        self.message_count = message_count
        self.k = k
        self.store = kernel.ParamStore()
        self.belief_net = BeliefNet(vocab_size, message_count, rng,
                                    hidden=hidden, blocks=blocks, store=self.store)
        kernel.add_linear(self.store, "gate", k, 1, rng)

    def update_belief(self, candidates, prior, message):
        return self.belief_net.update(candidates, prior, message)

    def wait_prob(self, belief, params=None):
        p = params if params is not None else self.belief_net.arrays()
        s = np.sort(np.asarray(belief))[::-1].reshape(1, -1)
        logit = float(s @ p["gate.w"] + p["gate.b"])
        return float(backend.active.sigmoid_fwd(np.array([[logit]]))[0, 0])

    def policy_from_belief(self, belief):
        """K+1 action distribution: (1-w) * belief for picks, w for wait."""
        w = self.wait_prob(belief)
        dist = np.empty(self.k + 1)
        dist[:self.k] = (1.0 - w) * np.asarray(belief)
        dist[self.k] = w
        return dist

    def action_distribution(self, candidates, prior, message):
        """Distribution over K picks plus wait after hearing one message."""
        return self.policy_from_belief(self.update_belief(candidates, prior, message))

    def act(self, belief, rng, greedy=False):
        """Sample (or argmax) an action index in 0..K, K meaning wait."""
        dist = self.policy_from_belief(belief)
        if greedy:
            return int(np.argmax(dist))
        dist = np.maximum(dist, 0.0)
        dist = dist / dist.sum()
        return int(rng.choice(self.k + 1, p=dist))

    # training ---------------------------------------------------------------

    def _log_prob_tape(self, record):
        """Differentiable log pi(a_t | f(O, b_prev, m_t)) for one step."""
        k = self.k
        x = kernel.constant(record.candidates)
        prior = kernel.constant(np.asarray(record.prior).reshape(-1, 1))
        emb = self.belief_net.embed_tape(x, k)
        post = self.belief_net.posterior_tape(
            emb, prior, np.full(k, record.message, dtype=np.intp), k)
        gate_in = kernel.sort_rows_desc(kernel.transpose(post))
        w = kernel.sigmoid(kernel.linear_shared(self.store, "gate", gate_in))
        if record.action == k:
            if w.item() < kernel.LOG_EPS:
                log.warning("wait probability clamped to %.0e in log-prob", kernel.LOG_EPS)
            return kernel.log_clamped(w)
        pick = np.zeros((1, k))
        pick[0, record.action] = 1.0
        chosen = kernel.matmul(kernel.constant(pick), post)
        if chosen.item() * (1.0 - w.item()) < kernel.LOG_EPS:
            log.warning("action probability clamped to %.0e in log-prob", kernel.LOG_EPS)
        stay = kernel.sub(kernel.constant([[1.0]]), w)
        return kernel.add(kernel.log_clamped(chosen), kernel.log_clamped(stay))

    def reinforce_step(self, episodes, lr, gamma, momentum=0.0):
        """One gradient-ascent step on the mean per-episode REINFORCE objective."""
        if not episodes or any(len(ep) == 0 for ep in episodes):
            raise ProtocolError("reinforce_step needs non-empty episodes")
        objective = None
        for records in episodes:
            rets = returns(records, gamma)
            ep_obj = None
            for record, ret in zip(records, rets):
                term = kernel.scale(self._log_prob_tape(record), float(ret))
                ep_obj = term if ep_obj is None else kernel.add(ep_obj, term)
            ep_obj = kernel.scale(ep_obj, 1.0 / len(records))
            objective = ep_obj if objective is None else kernel.add(objective, ep_obj)
        objective = kernel.scale(objective, 1.0 / len(episodes))
        kernel.scale(objective, -1.0).backward()
        self.store.sgd_step(lr, momentum=momentum)
        return objective.item()
