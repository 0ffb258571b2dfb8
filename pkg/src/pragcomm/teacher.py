"""Teacher agent: belief-conditioned Q values over messages.

The teacher scores every message by running her own copy of the belief
updater on her current estimate of the student's belief, pooling the
candidate embeddings with the predicted posterior and with the target
one-hot, and passing both pooled vectors through a small head. Message
choice is a temperature softmax over those Q values; learning combines the
TD regression with the obverter cross-entropy that keeps the belief
updater anchored to the student's actual beliefs.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from . import kernel
from .beliefs import BELIEF_FLOOR, BeliefNet
from .errors import ConfigError, TrainingError
from .kernel import backend


@dataclass
class Transition:
    """One replay record, all arrays in the teacher's presentation order."""

    candidates: np.ndarray     # K x V multi-hot
    target_slot: int
    prior_estimate: np.ndarray  # belief estimate before the message
    message: int
    next_belief: np.ndarray    # student's observed belief after the message
    reward: float
    terminal: bool


class ReplayBuffer:
    """Bounded FIFO with uniform sampling."""

    def __init__(self, capacity):
        if capacity < 1:
            raise ConfigError("replay capacity must be positive")
        self.capacity = capacity
        self._items = deque(maxlen=capacity)

    def add(self, transition):
        self._items.append(transition)

    def __len__(self):
        return len(self._items)

    def sample(self, n, rng):
        if len(self._items) < n:
            raise TrainingError(f"buffer holds {len(self._items)} < batch {n}")
        idx = rng.integers(len(self._items), size=n)
        return [self._items[i] for i in idx]


class TeacherModel:
    """Online parameters, frozen target snapshot, and both loss paths."""

    def __init__(self, vocab_size, message_count, rng, hidden=64, blocks=2,
                 q_hidden=64, beta=5.0, gamma=0.9, obverter_weight=1.0):
        if beta < 0 or not 0.0 <= gamma <= 1.0 or obverter_weight < 0:
            raise ConfigError("teacher hyperparameters out of range")
        self.vocab_size = vocab_size
        self.message_count = message_count
        self.beta = beta
        self.gamma = gamma
        self.obverter_weight = obverter_weight
        self.store = kernel.ParamStore()
        self.belief_net = BeliefNet(vocab_size, message_count, rng,
                                    hidden=hidden, blocks=blocks, store=self.store)
        kernel.add_linear(self.store, "q1", 2 * message_count, q_hidden, rng)
        kernel.add_linear(self.store, "q2", q_hidden, 1, rng)
        self.target_params = self.store.snapshot()
        self.train_steps = 0

    # fast (no-tape) paths -------------------------------------------------

    def q_values_all(self, candidates, target_slot, belief, params=None):
        """Q(.) for every message in one pass; params may be the target snapshot."""
        p = params if params is not None else self.belief_net.arrays()
        B = backend.active
        emb = self.belief_net.embed(candidates, params=p)          # K x M
        posts = self.belief_net.update_all(candidates, belief, embedding=emb)
        pooled_pred = B.matmul_tn(posts, emb)                      # M x M: row per message
        pooled_target = np.repeat(emb[target_slot:target_slot + 1, :],
                                  self.message_count, axis=0)
        h = B.sigmoid_fwd(B.ew_add(
            B.matmul_nn(np.ascontiguousarray(
                np.concatenate([pooled_pred, pooled_target], axis=1)), p["q1.w"]),
            p["q1.b"]))
        q = B.ew_add(B.matmul_nn(h, p["q2.w"]), p["q2.b"])
        return q[:, 0].copy()

    def q_value(self, candidates, target_slot, belief, message, params=None):
        return float(self.q_values_all(candidates, target_slot, belief,
                                       params=params)[message])

    def message_distribution(self, candidates, target_slot, belief):
        """Softmax policy over messages (uniform in the beta=0 limit)."""
        q = self.q_values_all(candidates, target_slot, belief)
        if self.beta == 0.0:
            return np.full(self.message_count, 1.0 / self.message_count)
        return backend.active.softmax_rows_fwd(q.reshape(1, -1), self.beta)[0]

    def select_message(self, candidates, target_slot, belief, rng, greedy=False):
        """Sample the softmax policy; greedy mode takes the argmax."""
        if greedy:
            return int(np.argmax(self.q_values_all(candidates, target_slot, belief)))
        probs = self.message_distribution(candidates, target_slot, belief)
        return int(rng.choice(self.message_count, p=probs))

    def update_estimate(self, candidates, belief, message):
        """Advance the teacher's own estimate of the student's belief."""
        return self.belief_net.update(candidates, belief, message)

    def td_target(self, transition):
        """Bootstrapped regression target under the frozen parameters."""
        if transition.terminal:
            return transition.reward
        future = self.q_values_all(transition.candidates, transition.target_slot,
                                   transition.next_belief, params=self.target_params)
        return transition.reward + self.gamma * float(future.max())

    # tape paths -------------------------------------------------------------

    def q_tape(self, candidates, target_slot, belief, message):
        """Single-game differentiable Q value (used by gradient checks)."""
        k = candidates.shape[0]
        x = kernel.constant(candidates)
        prior = kernel.constant(np.asarray(belief).reshape(-1, 1))
        emb = self.belief_net.embed_tape(x, k)
        post = self.belief_net.posterior_tape(
            emb, prior, np.full(k, message, dtype=np.intp), k)
        mask = np.zeros((k, 1))
        mask[target_slot, 0] = 1.0
        pooled = kernel.concat_cols(
            kernel.block_sum_rows(kernel.mul(post, emb), k),
            kernel.block_sum_rows(kernel.mul(kernel.constant(mask), emb), k))
        h = kernel.sigmoid(kernel.linear_shared(self.store, "q1", pooled))
        return kernel.linear_shared(self.store, "q2", h)

    def _loss_tape(self, batch, targets):
        """Joint L^Q / L^Obv graph over a stacked batch of transitions."""
        n = len(batch)
        k = batch[0].candidates.shape[0]
        x = kernel.constant(np.concatenate([tr.candidates for tr in batch], axis=0))
        prior = kernel.constant(
            np.concatenate([tr.prior_estimate for tr in batch]).reshape(-1, 1))
        row_msgs = np.repeat(np.array([tr.message for tr in batch], dtype=np.intp), k)
        mask = np.zeros((n * k, 1))
        for g, tr in enumerate(batch):
            mask[g * k + tr.target_slot, 0] = 1.0
        observed = kernel.constant(
            np.concatenate([tr.next_belief for tr in batch]).reshape(-1, 1))

        emb = self.belief_net.embed_tape(x, k)
        post = self.belief_net.posterior_tape(emb, prior, row_msgs, k)
        pooled = kernel.concat_cols(
            kernel.block_sum_rows(kernel.mul(post, emb), k),
            kernel.block_sum_rows(kernel.mul(kernel.constant(mask), emb), k))
        h = kernel.sigmoid(kernel.linear_shared(self.store, "q1", pooled))
        q = kernel.linear_shared(self.store, "q2", h)

        loss_q = kernel.mse(q, kernel.constant(targets.reshape(-1, 1)))
        loss_obv = kernel.scale(
            kernel.sum_all(kernel.mul(observed, kernel.log_clamped(post))), -1.0 / n)
        return loss_q, loss_obv

    def train_step(self, buffer, batch_size, lr, rng, momentum=0.0):
        """One optimizer step on L^Q + lambda * L^Obv over a uniform batch."""
        batch = buffer.sample(batch_size, rng)
        targets = np.array([self.td_target(tr) for tr in batch])
        loss_q, loss_obv = self._loss_tape(batch, targets)
        total = kernel.add(loss_q, kernel.scale(loss_obv, self.obverter_weight))
        total.backward()
        self.store.sgd_step(lr, momentum=momentum)
        self.train_steps += 1
        return loss_q.item(), loss_obv.item()

    def sync_target(self):
        """Freeze the current online parameters as the bootstrap network."""
        self.target_params = self.store.snapshot()
