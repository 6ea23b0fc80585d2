// Copyright 2026 The qbc-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qbc/qcore.hpp"

namespace qbc {

/// Opaque handle to one physical qubit inside a QubitPool.
struct QubitRef {
    int id = -1;
    friend bool operator==(const QubitRef &, const QubitRef &) = default;
};

/// The quantum state of one protocol run: a product of independent registers
/// of at most two qubits each. Parties exchange QubitRefs; which register a
/// qubit lives in is bookkeeping the parties never look at.
///
/// A Bell measurement across two different registers (entanglement swapping)
/// is evaluated on the joint vector of at most four qubits; afterwards the
/// measured pair and the remaining qubits form two new registers again.
class QubitPool {
  public:
    QubitRef add(const Register &one_qubit) {
        if (one_qubit.n_qubits() != 1) {
            throw std::invalid_argument("QubitPool::add: expects a one-qubit register");
        }
        const int r = new_register(one_qubit);
        const QubitRef q = new_qubit(r, 0);
        members_[r] = {q.id, -1};
        return q;
    }

    std::pair<QubitRef, QubitRef> add_pair(const Register &two_qubits) {
        if (two_qubits.n_qubits() != 2) {
            throw std::invalid_argument("QubitPool::add_pair: expects a two-qubit register");
        }
        const int r = new_register(two_qubits);
        const QubitRef a = new_qubit(r, 0);
        const QubitRef b = new_qubit(r, 1);
        members_[r] = {a.id, b.id};
        return {a, b};
    }

    size_t qubit_count() const { return loc_.size(); }

    void apply(QubitRef q, Gate g) {
        auto &[r, pos] = locate(q);
        regs_[r] = apply_1q(regs_[r], g, pos);
    }

    void apply_pauli(QubitRef q, PauliBits p) {
        auto &[r, pos] = locate(q);
        apply_pauli_bits(regs_[r].amplitudes_mut(), regs_[r].n_qubits(), pos, p);
    }

    /// Measures in `basis`; outcome 0 is |0> or |+>. An entangled register is
    /// split afterwards since the measured qubit is left in a product state.
    int measure(QubitRef q, Basis basis, Rng &rng) {
        const auto [r, pos] = locate(q);
        Register &reg = regs_[r];
        const int outcome = detail::measure_in_place(reg.amplitudes_mut(), reg.n_qubits(), pos, basis, rng);
        if (reg.n_qubits() == 2) {
            split(r, pos, Bb84State{basis, outcome});
        }
        return outcome;
    }

    /// Projective test onto `expected`: true on the "yes" outcome.
    bool check(QubitRef q, Bb84State expected, Rng &rng) { return measure(q, expected.basis, rng) == expected.bit; }

    BellIndex bell_measure(QubitRef a, QubitRef b, Rng &rng) {
        if (a == b) {
            throw std::invalid_argument("QubitPool::bell_measure: needs two distinct qubits");
        }
        const int ra = locate(a).reg;
        const int rb = locate(b).reg;

        // Joint vector over the qubits of ra (then rb when distinct).
        std::vector<int> order;
        std::vector<cplx> joint;
        append_register(ra, order, joint);
        if (rb != ra) {
            append_register(rb, order, joint);
        }
        const int m = static_cast<int>(order.size());
        int pa = -1, pb = -1;
        std::vector<int> rest;
        for (int i = 0; i < m; ++i) {
            if (order[i] == a.id) {
                pa = i;
            } else if (order[i] == b.id) {
                pb = i;
            } else {
                rest.push_back(i);
            }
        }
        const size_t rest_dim = size_t{1} << rest.size();

        std::array<std::vector<cplx>, 4> projected;
        std::array<double, 4> probs{};
        for (size_t k = 0; k < 4; ++k) {
            const auto beta = bell_amplitudes(kBellIndices[k]);
            projected[k].assign(rest_dim, 0);
            for (size_t ridx = 0; ridx < rest_dim; ++ridx) {
                size_t base = 0;
                for (size_t j = 0; j < rest.size(); ++j) {
                    if ((ridx >> (rest.size() - 1 - j)) & 1) {
                        base |= detail::qubit_mask(m, rest[j]);
                    }
                }
                cplx s = 0;
                for (size_t xy = 0; xy < 4; ++xy) {
                    size_t idx = base;
                    if (xy & 2) {
                        idx |= detail::qubit_mask(m, pa);
                    }
                    if (xy & 1) {
                        idx |= detail::qubit_mask(m, pb);
                    }
                    s += std::conj(beta[xy]) * joint[idx];
                }
                projected[k][ridx] = s;
            }
            probs[k] = detail::norm_sq(projected[k]);
        }

        const double u = rng.uniform();
        double acc = 0;
        size_t pick = 4;
        for (size_t k = 0; k < 4; ++k) {
            acc += probs[k];
            if (probs[k] > 0 && u < acc) {
                pick = k;
                break;
            }
        }
        if (pick == 4) {
            for (size_t k = 0; k < 4; ++k) {
                if (probs[k] > 0) {
                    pick = k;
                }
            }
        }

        const int pair_reg = new_register(bell_state(kBellIndices[pick]));
        loc_[a.id] = {pair_reg, 0};
        loc_[b.id] = {pair_reg, 1};
        members_[pair_reg] = {a.id, b.id};

        if (!rest.empty()) {
            std::array<cplx, 4> amps{};
            const double scale = 1.0 / std::sqrt(probs[pick]);
            for (size_t i = 0; i < rest_dim; ++i) {
                amps[i] = projected[pick][i] * scale;
            }
            const int rr = new_register(Register(static_cast<int>(rest.size()), amps));
            members_[rr] = {-1, -1};
            for (size_t j = 0; j < rest.size(); ++j) {
                loc_[order[rest[j]]] = {rr, static_cast<int>(j)};
                members_[rr][j] = order[rest[j]];
            }
        }
        return kBellIndices[pick];
    }

    /// Swaps in a fresh one-qubit state. If `q` was entangled, its partner is
    /// first decoupled by measuring `q` in Z, which leaves the partner in the
    /// same mixture as discarding `q` would.
    void replace(QubitRef q, const Register &one_qubit, Rng &rng) {
        if (one_qubit.n_qubits() != 1) {
            throw std::invalid_argument("QubitPool::replace: expects a one-qubit register");
        }
        if (regs_[locate(q).reg].n_qubits() == 2) {
            measure(q, Basis::Z, rng);
        }
        regs_[locate(q).reg] = one_qubit;
    }

    bool is_entangled(QubitRef q) const { return regs_[locate(q).reg].n_qubits() == 2; }

    /// State of an unentangled qubit (test and debug access).
    Register single_state(QubitRef q) const {
        const Register &reg = regs_[locate(q).reg];
        if (reg.n_qubits() != 1) {
            throw std::logic_error("QubitPool::single_state: qubit is part of a two-qubit register");
        }
        return reg;
    }

    /// Joint state of two qubits sharing a register, ordered (a, b).
    Register pair_state(QubitRef a, QubitRef b) const {
        const auto la = locate(a);
        const auto lb = locate(b);
        if (la.reg != lb.reg) {
            throw std::logic_error("QubitPool::pair_state: qubits are not in one register");
        }
        Register reg = regs_[la.reg];
        if (la.pos == 1) {
            std::array<cplx, 4> sw = {reg[0], reg[2], reg[1], reg[3]};
            reg = Register(2, sw);
        }
        return reg;
    }

  private:
    struct Location {
        int reg;
        int pos;
    };

    Location &locate(QubitRef q) {
        if (q.id < 0 || static_cast<size_t>(q.id) >= loc_.size()) {
            throw std::out_of_range("QubitPool: unknown qubit");
        }
        return loc_[q.id];
    }
    const Location &locate(QubitRef q) const { return const_cast<QubitPool *>(this)->locate(q); }

    int new_register(const Register &r) {
        regs_.push_back(r);
        members_.push_back({-1, -1});
        return static_cast<int>(regs_.size()) - 1;
    }

    QubitRef new_qubit(int reg, int pos) {
        loc_.push_back({reg, pos});
        return QubitRef{static_cast<int>(loc_.size()) - 1};
    }

    void append_register(int r, std::vector<int> &order, std::vector<cplx> &joint) const {
        const Register &reg = regs_[r];
        for (int j = 0; j < reg.n_qubits(); ++j) {
            order.push_back(members_[r][j]);
        }
        if (joint.empty()) {
            joint.assign(reg.amplitudes().begin(), reg.amplitudes().end());
            return;
        }
        std::vector<cplx> out;
        out.reserve(joint.size() * reg.dim());
        for (const cplx &x : joint) {
            for (const cplx &y : reg.amplitudes()) {
                out.push_back(x * y);
            }
        }
        joint = std::move(out);
    }

    /// After a projective measurement on `pos`, factor the register into
    /// the known eigenstate and the partner's remaining state.
    void split(int r, int pos, Bb84State measured) {
        const Register reg = regs_[r];
        const Register eig = prepare_bb84(measured);
        const int other = 1 - pos;
        std::array<cplx, 4> rest{};
        for (size_t i = 0; i < 4; ++i) {
            const int bit_pos = static_cast<int>((i >> (1 - pos)) & 1);
            const int bit_other = static_cast<int>((i >> (1 - other)) & 1);
            rest[bit_other] += std::conj(eig[bit_pos]) * reg[i];
        }
        const double nrm = std::sqrt(std::norm(rest[0]) + std::norm(rest[1]));
        rest[0] /= nrm;
        rest[1] /= nrm;
        const int id_pos = members_[r][pos];
        const int id_other = members_[r][other];
        regs_[r] = eig;
        members_[r] = {id_pos, -1};
        loc_[id_pos] = {r, 0};
        const int r2 = new_register(Register(1, rest));
        members_[r2] = {id_other, -1};
        loc_[id_other] = {r2, 0};
    }

    std::vector<Location> loc_;
    std::vector<Register> regs_;
    std::vector<std::array<int, 2>> members_;
};

}  // namespace qbc
