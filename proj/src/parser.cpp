#include "tbvec/parser.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

#include "tbvec/util.hpp"

namespace tbvec {

namespace {

// y += W x, W row-major (rows x cols)
void matvec_acc(const double* W, const double* x, double* y, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        const double* wr = W + static_cast<size_t>(r) * cols;
        double s = 0.0;
        for (int c = 0; c < cols; ++c) s += wr[c] * x[c];
        y[r] += s;
    }
}

// x_grad += W^T y_grad; W_grad += y_grad x^T
void matvec_back(const double* W, const double* x, const double* dy, double* dW, double* dx,
                 int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        const double g = dy[r];
        if (g == 0.0) continue;
        const double* wr = W + static_cast<size_t>(r) * cols;
        double* dwr = dW + static_cast<size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) {
            dwr[c] += g * x[c];
            if (dx) dx[c] += g * wr[c];
        }
    }
}

size_t layout(ParserModel& m) {
    const ParserConfig& c = m.config;
    const size_t vw = m.word_ids.size() + 1;  // +UNK
    const size_t vc = m.char_ids.size() + 1;
    const size_t H = c.char_hidden;
    size_t off = 0;
    auto take = [&off](size_t n) {
        size_t o = off;
        off += n;
        return o;
    };
    m.off_word = take(vw * c.word_dim);
    m.off_char = take(vc * c.char_dim);
    m.off_tb = take(static_cast<size_t>(m.num_treebanks) * c.tb_dim);
    m.off_fwd_wx = take(H * c.char_dim);
    m.off_fwd_wh = take(H * H);
    m.off_fwd_b = take(H);
    m.off_bwd_wx = take(H * c.char_dim);
    m.off_bwd_wh = take(H * H);
    m.off_bwd_b = take(H);
    m.off_w1 = take(static_cast<size_t>(c.hidden) * m.feat_dim());
    m.off_b1 = take(c.hidden);
    m.off_w2 = take(static_cast<size_t>(m.num_actions()) * c.hidden);
    m.off_b2 = take(m.num_actions());
    m.off_root = take(c.enc_dim());
    return off;
}

struct TokenTrace {
    int word = 0;
    std::vector<int> chars;
    std::vector<std::vector<double>> fwd, bwd;  // recurrent states, one per char
    std::vector<double> enc;
};

void run_char_rnn(const ParserModel& m, const std::vector<int>& chars, bool backward,
                  std::vector<std::vector<double>>& states) {
    const ParserConfig& c = m.config;
    const int H = c.char_hidden;
    const double* Wx = m.theta.data() + (backward ? m.off_bwd_wx : m.off_fwd_wx);
    const double* Wh = m.theta.data() + (backward ? m.off_bwd_wh : m.off_fwd_wh);
    const double* b = m.theta.data() + (backward ? m.off_bwd_b : m.off_fwd_b);
    const size_t k = chars.size();
    states.assign(k, std::vector<double>(H, 0.0));
    std::vector<double> prev(H, 0.0);
    for (size_t step = 0; step < k; ++step) {
        const size_t i = backward ? k - 1 - step : step;
        const double* x = m.theta.data() + m.off_char + static_cast<size_t>(chars[i]) * c.char_dim;
        std::vector<double>& h = states[step];
        for (int r = 0; r < H; ++r) h[r] = b[r];
        matvec_acc(Wx, x, h.data(), H, c.char_dim);
        matvec_acc(Wh, prev.data(), h.data(), H, H);
        for (int r = 0; r < H; ++r) h[r] = std::tanh(h[r]);
        prev = h;
    }
}

TokenTrace compute_trace(const ParserModel& m, const Token& token,
                         const std::vector<double>& tbvec) {
    const ParserConfig& c = m.config;
    TokenTrace tr;
    tr.word = m.word_id(token.form);
    for (uint32_t cp : utf8_codepoints(token.form)) tr.chars.push_back(m.char_id(cp));
    run_char_rnn(m, tr.chars, false, tr.fwd);
    run_char_rnn(m, tr.chars, true, tr.bwd);
    tr.enc.resize(c.enc_dim());
    const double* wrow = m.theta.data() + m.off_word + static_cast<size_t>(tr.word) * c.word_dim;
    std::copy(wrow, wrow + c.word_dim, tr.enc.begin());
    const int H = c.char_hidden;
    if (!tr.chars.empty()) {
        std::copy(tr.fwd.back().begin(), tr.fwd.back().end(), tr.enc.begin() + c.word_dim);
        std::copy(tr.bwd.back().begin(), tr.bwd.back().end(), tr.enc.begin() + c.word_dim + H);
    } else {
        std::fill(tr.enc.begin() + c.word_dim, tr.enc.begin() + c.word_dim + 2 * H, 0.0);
    }
    std::copy(tbvec.begin(), tbvec.end(), tr.enc.begin() + c.word_dim + 2 * H);
    return tr;
}

// BPTT through one direction of the char encoder, gradient arriving at the
// final state only.
void backprop_char_rnn(const ParserModel& m, const TokenTrace& tr, bool backward,
                       const double* d_final, std::vector<double>& grad) {
    const ParserConfig& c = m.config;
    const int H = c.char_hidden;
    const size_t k = tr.chars.size();
    if (k == 0) return;
    const std::vector<std::vector<double>>& states = backward ? tr.bwd : tr.fwd;
    const double* Wx = m.theta.data() + (backward ? m.off_bwd_wx : m.off_fwd_wx);
    const double* Wh = m.theta.data() + (backward ? m.off_bwd_wh : m.off_fwd_wh);
    double* dWx = grad.data() + (backward ? m.off_bwd_wx : m.off_fwd_wx);
    double* dWh = grad.data() + (backward ? m.off_bwd_wh : m.off_fwd_wh);
    double* db = grad.data() + (backward ? m.off_bwd_b : m.off_fwd_b);
    std::vector<double> dh(d_final, d_final + H);
    std::vector<double> dprev(H);
    const std::vector<double> zero(H, 0.0);
    for (size_t step = k; step-- > 0;) {
        const size_t i = backward ? k - 1 - step : step;
        const std::vector<double>& h = states[step];
        const std::vector<double>& prev = step == 0 ? zero : states[step - 1];
        std::vector<double> dz(H);
        for (int r = 0; r < H; ++r) dz[r] = dh[r] * (1.0 - h[r] * h[r]);
        const double* x = m.theta.data() + m.off_char + static_cast<size_t>(tr.chars[i]) * c.char_dim;
        double* dx = grad.data() + m.off_char + static_cast<size_t>(tr.chars[i]) * c.char_dim;
        for (int r = 0; r < H; ++r) db[r] += dz[r];
        matvec_back(Wx, x, dz.data(), dWx, dx, H, c.char_dim);
        std::fill(dprev.begin(), dprev.end(), 0.0);
        matvec_back(Wh, prev.data(), dz.data(), dWh, dprev.data(), H, H);
        dh = dprev;
    }
}

// d_enc distributed back into word table, char encoder and treebank rows
// (split across rows by the interpolation weights).
void backprop_token(const ParserModel& m, const TokenTrace& tr, const double* d_enc,
                    const WeightVector& weights, std::vector<double>& grad) {
    const ParserConfig& c = m.config;
    const int H = c.char_hidden;
    double* dword = grad.data() + m.off_word + static_cast<size_t>(tr.word) * c.word_dim;
    for (int i = 0; i < c.word_dim; ++i) dword[i] += d_enc[i];
    backprop_char_rnn(m, tr, false, d_enc + c.word_dim, grad);
    backprop_char_rnn(m, tr, true, d_enc + c.word_dim + H, grad);
    const double* d_tb = d_enc + c.word_dim + 2 * H;
    for (size_t t = 0; t < weights.size(); ++t) {
        if (weights[t] == 0.0) continue;
        double* row = grad.data() + m.off_tb + t * c.tb_dim;
        for (int i = 0; i < c.tb_dim; ++i) row[i] += weights[t] * d_tb[i];
    }
}

// --- arc-hybrid machinery ---

constexpr int kSlotEmpty = -1;
constexpr int kSlotRoot = 0;

struct Config {
    std::vector<int> stack;  // bottom..top, 0 (ROOT) at the bottom
    int buf = 1;             // next buffer token, n+1 when exhausted
    int n = 0;

    bool buffer_nonempty() const { return buf <= n; }
    bool terminal() const { return !buffer_nonempty() && stack.size() == 1; }
    bool legal(ActionKind k) const {
        switch (k) {
            case ActionKind::kShift: return buffer_nonempty();
            case ActionKind::kLeftArc: return stack.size() >= 2 && buffer_nonempty();
            case ActionKind::kRightArc:
                // the final right-arc attaches the last token to ROOT
                return stack.size() >= 3 || (stack.size() == 2 && !buffer_nonempty());
        }
        return false;
    }
    // returns (head, dependent) for arc transitions, {-1,-1} for shift
    std::pair<int, int> apply(const Transition& t) {
        switch (t.kind) {
            case ActionKind::kShift:
                stack.push_back(buf++);
                return {-1, -1};
            case ActionKind::kLeftArc: {
                int dep = stack.back();
                stack.pop_back();
                return {buf <= n ? buf : 0, dep};
            }
            case ActionKind::kRightArc: {
                int dep = stack.back();
                stack.pop_back();
                return {stack.back(), dep};
            }
        }
        return {-1, -1};
    }
    void slots(int out[4]) const {
        const size_t sz = stack.size();
        out[0] = sz >= 3 ? stack[sz - 3] : kSlotEmpty;  // s2
        out[1] = sz >= 2 ? stack[sz - 2] : kSlotEmpty;  // s1
        out[2] = sz >= 1 ? stack[sz - 1] : kSlotEmpty;  // s0
        out[3] = buffer_nonempty() ? buf : kSlotEmpty;  // b0
    }
};

int action_id(const ParserModel& m, const Transition& t) {
    const int L = static_cast<int>(m.labels.size());
    switch (t.kind) {
        case ActionKind::kShift: return 0;
        case ActionKind::kLeftArc: return 1 + t.label;
        case ActionKind::kRightArc: return 1 + L + t.label;
    }
    return -1;
}

Transition action_from_id(const ParserModel& m, int id) {
    const int L = static_cast<int>(m.labels.size());
    if (id == 0) return {ActionKind::kShift, -1};
    if (id <= L) return {ActionKind::kLeftArc, id - 1};
    return {ActionKind::kRightArc, id - 1 - L};
}

bool action_legal(const ParserModel& m, const Config& cfg, int id) {
    return cfg.legal(action_from_id(m, id).kind);
}

}  // namespace

int ParserModel::word_id(const std::string& form) const {
    auto it = word_ids.find(form);
    return it == word_ids.end() ? 0 : it->second;
}

int ParserModel::char_id(uint32_t cp) const {
    auto it = char_ids.find(cp);
    return it == char_ids.end() ? 0 : it->second;
}

int ParserModel::label_id(const std::string& deprel) const {
    auto it = std::lower_bound(labels.begin(), labels.end(), deprel);
    if (it == labels.end() || *it != deprel) return -1;
    return static_cast<int>(it - labels.begin());
}

std::vector<double> interpolate_tbvec(const ParserModel& model, const WeightVector& weights) {
    if (static_cast<int>(weights.size()) != model.num_treebanks)
        throw std::invalid_argument("weight vector length " + std::to_string(weights.size()) +
                                    " does not match m=" + std::to_string(model.num_treebanks));
    const int d = model.config.tb_dim;
    std::vector<double> f(d, 0.0);
    for (size_t t = 0; t < weights.size(); ++t) {
        const double* row = model.theta.data() + model.off_tb + t * d;
        for (int i = 0; i < d; ++i) f[i] += weights[t] * row[i];
    }
    return f;
}

std::vector<double> encode_token(const ParserModel& model, const Token& token,
                                 const std::vector<double>& tbvec) {
    if (static_cast<int>(tbvec.size()) != model.config.tb_dim)
        throw std::invalid_argument("treebank vector has wrong dimension");
    return compute_trace(model, token, tbvec).enc;
}

bool is_projective(const std::vector<int>& heads) {
    const int n = static_cast<int>(heads.size());
    for (int d1 = 1; d1 <= n; ++d1) {
        const int h1 = heads[d1 - 1];
        const int lo1 = std::min(h1, d1), hi1 = std::max(h1, d1);
        for (int d2 = d1 + 1; d2 <= n; ++d2) {
            const int h2 = heads[d2 - 1];
            const int lo2 = std::min(h2, d2), hi2 = std::max(h2, d2);
            const bool lo2_in = lo2 > lo1 && lo2 < hi1;
            const bool hi2_in = hi2 > lo1 && hi2 < hi1;
            if (lo2_in != hi2_in && lo2 != lo1 && lo2 != hi1 && hi2 != lo1 && hi2 != hi1)
                return false;
        }
    }
    return true;
}

std::vector<int> projectivize(const std::vector<int>& heads) {
    std::vector<int> h = heads;
    const int n = static_cast<int>(h.size());
    for (int iter = 0; iter < n * n && !is_projective(h); ++iter) {
        // lift the shortest arc that takes part in a crossing
        int best = -1, best_span = n + 2;
        for (int d = 1; d <= n; ++d) {
            if (h[d - 1] == 0) continue;  // never lift the root arc
            const int hd = h[d - 1];
            const int lo = std::min(hd, d), hi = std::max(hd, d);
            bool crosses = false;
            for (int d2 = 1; d2 <= n && !crosses; ++d2) {
                if (d2 == d) continue;
                const int h2 = h[d2 - 1];
                const int lo2 = std::min(h2, d2), hi2 = std::max(h2, d2);
                const bool lo2_in = lo2 > lo && lo2 < hi;
                const bool hi2_in = hi2 > lo && hi2 < hi;
                if (lo2_in != hi2_in && lo2 != lo && lo2 != hi && hi2 != lo && hi2 != hi)
                    crosses = true;
            }
            // lifting must not create a self-loop or a second root (a crossing
            // always contains another arc whose grandparent is not the root)
            if (crosses && h[hd - 1] != d && h[hd - 1] != 0) {
                const int span = hi - lo;
                if (span < best_span || (span == best_span && d < best)) {
                    best = d;
                    best_span = span;
                }
            }
        }
        if (best < 0) break;
        h[best - 1] = h[h[best - 1] - 1];
    }
    return h;
}

OracleResult oracle_transitions(const ParserModel& model, const Sentence& gold) {
    const int n = static_cast<int>(gold.tokens.size());
    if (!gold.has_gold_heads())
        throw std::invalid_argument("oracle needs gold heads (sentence " + gold.id + ")");
    if (!validate_tree(gold).empty())
        throw std::invalid_argument("oracle needs a well-formed gold tree (sentence " + gold.id + ")");

    OracleResult res;
    std::vector<int> g(n);
    for (int i = 0; i < n; ++i) g[i] = gold.tokens[i].head;
    if (!is_projective(g)) {
        res.was_projective = false;
        g = projectivize(g);
        if (!is_projective(g))
            throw std::runtime_error("projectivization failed (sentence " + gold.id + ")");
    }

    std::vector<int> pending_children(n + 1, 0);  // unattached gold dependents
    for (int i = 0; i < n; ++i) ++pending_children[g[i]];

    Config cfg;
    cfg.n = n;
    cfg.stack = {0};
    while (!cfg.terminal()) {
        const int s0 = cfg.stack.back();
        Transition t{ActionKind::kShift, -1};
        if (s0 != 0 && pending_children[s0] == 0) {
            const int label = model.label_id(gold.tokens[s0 - 1].deprel);
            if (cfg.legal(ActionKind::kLeftArc) && g[s0 - 1] == cfg.buf) {
                if (label < 0)
                    throw std::invalid_argument("deprel '" + gold.tokens[s0 - 1].deprel +
                                                "' not in the model label set");
                t = {ActionKind::kLeftArc, label};
            } else if (cfg.legal(ActionKind::kRightArc) && g[s0 - 1] == cfg.stack[cfg.stack.size() - 2]) {
                if (label < 0)
                    throw std::invalid_argument("deprel '" + gold.tokens[s0 - 1].deprel +
                                                "' not in the model label set");
                t = {ActionKind::kRightArc, label};
            }
        }
        if (t.kind == ActionKind::kShift && !cfg.legal(ActionKind::kShift))
            throw std::runtime_error("oracle deadlock (sentence " + gold.id + ")");
        auto [head, dep] = cfg.apply(t);
        if (dep > 0) --pending_children[g[dep - 1]];
        res.transitions.push_back(t);
    }
    return res;
}

std::string transition_name(const ParserModel& model, const Transition& t) {
    switch (t.kind) {
        case ActionKind::kShift: return "shift";
        case ActionKind::kLeftArc:
            return "left-arc(" + (t.label >= 0 ? model.labels[t.label] : std::string("?")) + ")";
        case ActionKind::kRightArc:
            return "right-arc(" + (t.label >= 0 ? model.labels[t.label] : std::string("?")) + ")";
    }
    return "?";
}

namespace {

// One scored transition step. Returns the step loss; fills grads when
// training (d_enc rows indexed by token, slot 0 handled via off_root).
double step_forward_backward(const ParserModel& m, const Config& cfg,
                             const std::vector<TokenTrace>& traces, int gold_action,
                             int* predicted, std::vector<double>* grad,
                             std::vector<std::vector<double>>* d_enc, std::vector<double>* d_root) {
    const ParserConfig& c = m.config;
    const int E = c.enc_dim();
    const int F = m.feat_dim();
    const int A = m.num_actions();
    int slots[4];
    cfg.slots(slots);

    std::vector<double> f(F, 0.0);
    for (int s = 0; s < 4; ++s) {
        const double* src = nullptr;
        if (slots[s] == kSlotRoot)
            src = m.theta.data() + m.off_root;
        else if (slots[s] > 0)
            src = traces[slots[s] - 1].enc.data();
        if (src) std::copy(src, src + E, f.begin() + static_cast<size_t>(s) * E);
    }

    std::vector<double> h(c.hidden);
    {
        const double* b1 = m.theta.data() + m.off_b1;
        std::copy(b1, b1 + c.hidden, h.begin());
        matvec_acc(m.theta.data() + m.off_w1, f.data(), h.data(), c.hidden, F);
        for (double& v : h) v = std::tanh(v);
    }
    std::vector<double> scores(A);
    {
        const double* b2 = m.theta.data() + m.off_b2;
        std::copy(b2, b2 + A, scores.begin());
        matvec_acc(m.theta.data() + m.off_w2, h.data(), scores.data(), A, c.hidden);
    }

    double best = -1e300;
    int best_a = -1;
    for (int a = 0; a < A; ++a) {
        if (!action_legal(m, cfg, a)) continue;
        if (scores[a] > best) {
            best = scores[a];
            best_a = a;
        }
    }
    if (predicted) *predicted = best_a;

    double z = 0.0;
    std::vector<double> p(A, 0.0);
    for (int a = 0; a < A; ++a) {
        if (!action_legal(m, cfg, a)) continue;
        p[a] = std::exp(scores[a] - best);
        z += p[a];
    }
    for (double& v : p) v /= z;

    double loss = 0.0;
    if (gold_action >= 0) loss = -std::log(std::max(p[gold_action], 1e-300));

    if (grad) {
        std::vector<double> ds = p;
        ds[gold_action] -= 1.0;
        std::vector<double> dh(c.hidden, 0.0);
        matvec_back(m.theta.data() + m.off_w2, h.data(), ds.data(), grad->data() + m.off_w2,
                    dh.data(), A, c.hidden);
        for (int a = 0; a < A; ++a) (*grad)[m.off_b2 + a] += ds[a];
        std::vector<double> dz1(c.hidden);
        for (int i = 0; i < c.hidden; ++i) dz1[i] = dh[i] * (1.0 - h[i] * h[i]);
        std::vector<double> df(F, 0.0);
        matvec_back(m.theta.data() + m.off_w1, f.data(), dz1.data(), grad->data() + m.off_w1,
                    df.data(), c.hidden, F);
        for (int i = 0; i < c.hidden; ++i) (*grad)[m.off_b1 + i] += dz1[i];
        for (int s = 0; s < 4; ++s) {
            const double* dfs = df.data() + static_cast<size_t>(s) * E;
            if (slots[s] == kSlotRoot) {
                for (int i = 0; i < E; ++i) (*d_root)[i] += dfs[i];
            } else if (slots[s] > 0) {
                std::vector<double>& de = (*d_enc)[slots[s] - 1];
                for (int i = 0; i < E; ++i) de[i] += dfs[i];
            }
        }
    }
    return loss;
}

// Summed loss over the oracle transitions of one sentence; gradients are
// accumulated into `grad` when non-null. Returns the number of steps.
size_t sentence_pass(const ParserModel& m, const Sentence& sent, const WeightVector& weights,
                     double* loss_out, std::vector<double>* grad) {
    const int n = static_cast<int>(sent.tokens.size());
    const std::vector<double> tbvec = interpolate_tbvec(m, weights);
    std::vector<TokenTrace> traces;
    traces.reserve(n);
    for (const Token& t : sent.tokens) traces.push_back(compute_trace(m, t, tbvec));

    OracleResult oracle = oracle_transitions(m, sent);

    std::vector<std::vector<double>> d_enc;
    std::vector<double> d_root;
    if (grad) {
        d_enc.assign(n, std::vector<double>(m.config.enc_dim(), 0.0));
        d_root.assign(m.config.enc_dim(), 0.0);
    }

    Config cfg;
    cfg.n = n;
    cfg.stack = {0};
    double loss = 0.0;
    size_t steps = 0;
    for (const Transition& t : oracle.transitions) {
        const int gold = action_id(m, t);
        loss += step_forward_backward(m, cfg, traces, gold, nullptr, grad, &d_enc, &d_root);
        cfg.apply(t);
        ++steps;
    }
    if (grad) {
        for (int i = 0; i < n; ++i) backprop_token(m, traces[i], d_enc[i].data(), weights, *grad);
        for (int i = 0; i < m.config.enc_dim(); ++i) (*grad)[m.off_root + i] += d_root[i];
    }
    *loss_out = loss;
    return steps;
}

}  // namespace

double loss_and_grad(const ParserModel& model, const std::vector<const Sentence*>& sentences,
                     std::vector<double>* grad) {
    if (grad) grad->assign(model.theta.size(), 0.0);
    double total = 0.0;
    size_t steps = 0;
    for (const Sentence* s : sentences) {
        double l = 0.0;
        steps += sentence_pass(model, *s, corner(s->source_treebank, model.num_treebanks), &l,
                               grad);
        total += l;
    }
    if (steps == 0) return 0.0;
    if (grad)
        for (double& g : *grad) g /= static_cast<double>(steps);
    return total / static_cast<double>(steps);
}

ParserModel train(const std::vector<Treebank>& treebanks, const ParserConfig& config,
                  TrainReport* report) {
    ParserModel m;
    m.config = config;
    m.num_treebanks = static_cast<int>(treebanks.size());
    if (m.num_treebanks == 0) throw std::invalid_argument("no training treebanks");

    std::vector<const Sentence*> train_sents;
    std::map<std::string, int> word_freq;
    std::map<uint32_t, int> char_seen;
    std::map<std::string, int> label_seen;
    for (const Treebank& tb : treebanks) {
        if (tb.train.empty())
            throw std::invalid_argument("treebank " + tb.name + " has an empty train split");
        for (const Sentence& s : tb.train) {
            train_sents.push_back(&s);
            for (const Token& t : s.tokens) {
                ++word_freq[t.form];
                for (uint32_t cp : utf8_codepoints(t.form)) ++char_seen[cp];
                if (t.deprel != "_" && !t.deprel.empty()) ++label_seen[t.deprel];
            }
        }
    }
    int next = 1;
    for (const auto& [w, f] : word_freq)
        if (f >= config.word_min_freq) m.word_ids[w] = next++;
    next = 1;
    for (const auto& [cp, f] : char_seen) m.char_ids[cp] = next++;
    for (const auto& [l, f] : label_seen) m.labels.push_back(l);  // map iteration is sorted

    const size_t nparams = layout(m);
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> init(-0.1, 0.1);
    m.theta.resize(nparams);
    for (double& v : m.theta) v = init(rng);

    int skipped = 0;
    std::vector<const Sentence*> usable;
    for (const Sentence* s : train_sents) {
        if (s->tokens.empty()) continue;
        try {
            oracle_transitions(m, *s);
            usable.push_back(s);
        } catch (const std::exception&) {
            ++skipped;
        }
    }
    if (usable.empty()) throw std::invalid_argument("no usable training sentences");

    const double loss0 = loss_and_grad(m, usable, nullptr);

    std::vector<double> grad(nparams, 0.0);
    std::vector<const Sentence*> order = usable;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (const Sentence* s : order) {
            std::fill(grad.begin(), grad.end(), 0.0);
            double l = 0.0;
            const size_t steps =
                sentence_pass(m, *s, corner(s->source_treebank, m.num_treebanks), &l, &grad);
            if (!std::isfinite(l))
                throw std::runtime_error("training diverged: non-finite loss on sentence " + s->id +
                                         " in epoch " + std::to_string(epoch));
            const double scale = config.learning_rate / static_cast<double>(steps);
            for (size_t i = 0; i < nparams; ++i) m.theta[i] -= scale * grad[i];
        }
    }

    const double loss1 = loss_and_grad(m, usable, nullptr);
    if (report) {
        report->initial_loss = loss0;
        report->final_loss = loss1;
        report->skipped_nonprojective = skipped;
    }
    return m;
}

ParseResult parse_with_tbvec(const ParserModel& model, const Sentence& sentence,
                             const std::vector<double>& tbvec) {
    if (static_cast<int>(tbvec.size()) != model.config.tb_dim)
        throw std::invalid_argument("treebank vector has wrong dimension");
    const int n = static_cast<int>(sentence.tokens.size());
    ParseResult res;
    res.heads.assign(n, 0);
    res.deprels.assign(n, "root");
    if (n == 0) return res;

    std::vector<TokenTrace> traces;
    traces.reserve(n);
    for (const Token& t : sentence.tokens) traces.push_back(compute_trace(model, t, tbvec));

    Config cfg;
    cfg.n = n;
    cfg.stack = {0};
    while (!cfg.terminal()) {
        int best = -1;
        step_forward_backward(model, cfg, traces, -1, &best, nullptr, nullptr, nullptr);
        const Transition t = action_from_id(model, best);
        auto [head, dep] = cfg.apply(t);
        if (dep > 0) {
            res.heads[dep - 1] = head;
            res.deprels[dep - 1] = t.label >= 0 ? model.labels[t.label] : "dep";
        }
    }
    return res;
}

ParseResult parse(const ParserModel& model, const Sentence& sentence, const WeightVector& weights) {
    if (!sums_to_one(weights))
        throw std::invalid_argument("interpolation weights must sum to 1");
    return parse_with_tbvec(model, sentence, interpolate_tbvec(model, weights));
}

// --- serialization ---

namespace {

constexpr char kMagic[8] = {'T', 'B', 'V', 'M', 'O', 'D', 'L', '1'};
constexpr uint32_t kFormatVersion = 1;

template <typename T>
void put(std::string& out, T v) {
    static_assert(std::endian::native == std::endian::little, "little-endian host required");
    out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_string(std::string& out, const std::string& s) {
    put<uint32_t>(out, static_cast<uint32_t>(s.size()));
    out += s;
}

struct Reader {
    const std::string& data;
    size_t pos = 0;
    template <typename T>
    T get() {
        if (pos + sizeof(T) > data.size()) throw std::runtime_error("truncated model file");
        T v;
        std::memcpy(&v, data.data() + pos, sizeof(T));
        pos += sizeof(T);
        return v;
    }
    std::string get_string() {
        const uint32_t n = get<uint32_t>();
        if (pos + n > data.size()) throw std::runtime_error("truncated model file");
        std::string s = data.substr(pos, n);
        pos += n;
        return s;
    }
};

}  // namespace

void save_model(const ParserModel& model, const std::string& path) {
    std::string out;
    out.append(kMagic, sizeof(kMagic));
    put<uint32_t>(out, kFormatVersion);
    const ParserConfig& c = model.config;
    put<int32_t>(out, c.word_dim);
    put<int32_t>(out, c.char_dim);
    put<int32_t>(out, c.char_hidden);
    put<int32_t>(out, c.tb_dim);
    put<int32_t>(out, c.hidden);
    put<int32_t>(out, c.epochs);
    put<int32_t>(out, c.word_min_freq);
    put<double>(out, c.learning_rate);
    put<uint64_t>(out, c.seed);
    put<int32_t>(out, model.num_treebanks);
    put<uint32_t>(out, static_cast<uint32_t>(model.word_ids.size()));
    for (const auto& [w, id] : model.word_ids) {
        put_string(out, w);
        put<int32_t>(out, id);
    }
    put<uint32_t>(out, static_cast<uint32_t>(model.char_ids.size()));
    for (const auto& [cp, id] : model.char_ids) {
        put<uint32_t>(out, cp);
        put<int32_t>(out, id);
    }
    put<uint32_t>(out, static_cast<uint32_t>(model.labels.size()));
    for (const std::string& l : model.labels) put_string(out, l);
    put<uint64_t>(out, model.theta.size());
    for (double v : model.theta) put<float>(out, static_cast<float>(v));
    atomic_write_file(path, out);
}

ParserModel load_model(const std::string& path) {
    const std::string data = read_file(path);
    Reader r{data};
    if (data.size() < sizeof(kMagic) || std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("not a model file: " + path);
    r.pos = sizeof(kMagic);
    const uint32_t version = r.get<uint32_t>();
    if (version != kFormatVersion)
        throw std::runtime_error("model format version " + std::to_string(version) +
                                 " unsupported (expected " + std::to_string(kFormatVersion) + ")");
    ParserModel m;
    m.config.word_dim = r.get<int32_t>();
    m.config.char_dim = r.get<int32_t>();
    m.config.char_hidden = r.get<int32_t>();
    m.config.tb_dim = r.get<int32_t>();
    m.config.hidden = r.get<int32_t>();
    m.config.epochs = r.get<int32_t>();
    m.config.word_min_freq = r.get<int32_t>();
    m.config.learning_rate = r.get<double>();
    m.config.seed = r.get<uint64_t>();
    m.num_treebanks = r.get<int32_t>();
    const uint32_t nwords = r.get<uint32_t>();
    for (uint32_t i = 0; i < nwords; ++i) {
        std::string w = r.get_string();
        m.word_ids[w] = r.get<int32_t>();
    }
    const uint32_t nchars = r.get<uint32_t>();
    for (uint32_t i = 0; i < nchars; ++i) {
        uint32_t cp = r.get<uint32_t>();
        m.char_ids[cp] = r.get<int32_t>();
    }
    const uint32_t nlabels = r.get<uint32_t>();
    for (uint32_t i = 0; i < nlabels; ++i) m.labels.push_back(r.get_string());
    const uint64_t nparams = r.get<uint64_t>();
    const size_t expect = layout(m);
    if (nparams != expect)
        throw std::runtime_error("model parameter count mismatch: file has " +
                                 std::to_string(nparams) + ", layout needs " +
                                 std::to_string(expect));
    m.theta.resize(nparams);
    for (uint64_t i = 0; i < nparams; ++i) m.theta[i] = r.get<float>();
    for (double v : m.theta)
        if (!std::isfinite(v)) throw std::runtime_error("non-finite parameter in model file");
    return m;
}

}  // namespace tbvec
