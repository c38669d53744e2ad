#include "dqec/blossom.hpp"

#include <algorithm>
#include <cstring>
#include <deque>
#include <limits>
#include <stdexcept>

namespace dqec {

// Primal-dual blossom algorithm for maximum-weight matching on a dense
// graph, O(n^3). Classical formulation with explicit flower lists and
// per-node slack pointers; dual variables stay integral because every dual
// update preserves label parity.
class BlossomMatcher::Impl {
public:
    explicit Impl(int n) : n_(n) {
        const int cap = 2 * n + 2;
        w_.assign(cap, std::vector<long long>(cap, 0));
        eu_.assign(cap, std::vector<int>(cap, 0));
        ev_.assign(cap, std::vector<int>(cap, 0));
        for (int u = 0; u < cap; ++u)
            for (int v = 0; v < cap; ++v) {
                eu_[u][v] = u;
                ev_[u][v] = v;
            }
        lab_.assign(cap, 0);
        match_.assign(cap, 0);
        slack_.assign(cap, 0);
        st_.assign(cap, 0);
        pa_.assign(cap, 0);
        s_.assign(cap, 0);
        vis_.assign(cap, 0);
        flower_.assign(cap, {});
        flower_from_.assign(cap, std::vector<int>(cap, 0));
    }

    void set_weight(int u, int v, long long w) {
        w_[u + 1][v + 1] = w;
        w_[v + 1][u + 1] = w;
    }

    std::vector<int> solve() {
        std::fill(match_.begin() + 1, match_.begin() + n_ + 1, 0);
        n_x_ = n_;
        for (int u = 0; u <= n_; ++u) {
            st_[u] = u;
            flower_[u].clear();
        }
        long long w_max = 0;
        for (int u = 1; u <= n_; ++u)
            for (int v = 1; v <= n_; ++v) {
                flower_from_[u][v] = (u == v ? u : 0);
                w_max = std::max(w_max, w_[u][v]);
            }
        for (int u = 1; u <= n_; ++u) lab_[u] = w_max;
        while (matching_phase()) {
        }
        std::vector<int> mate(n_, -1);
        for (int u = 1; u <= n_; ++u)
            if (match_[u]) mate[u - 1] = match_[u] - 1;
        return mate;
    }

private:
    static constexpr long long kInf = std::numeric_limits<long long>::max() / 4;

    long long delta(int u, int v) const { return lab_[eu_[u][v]] + lab_[ev_[u][v]] - 2 * w_[u][v]; }

    void update_slack(int u, int x) {
        if (!slack_[x] || delta(u, x) < delta(slack_[x], x)) slack_[x] = u;
    }

    void set_slack(int x) {
        slack_[x] = 0;
        for (int u = 1; u <= n_; ++u)
            if (w_[u][x] > 0 && st_[u] != x && s_[st_[u]] == 0) update_slack(u, x);
    }

    void q_push(int x) {
        if (x <= n_) {
            q_.push_back(x);
        } else {
            for (int y : flower_[x]) q_push(y);
        }
    }

    void set_st(int x, int b) {
        st_[x] = b;
        if (x > n_)
            for (int y : flower_[x]) set_st(y, b);
    }

    int get_pr(int b, int xr) {
        const int pr =
            int(std::find(flower_[b].begin(), flower_[b].end(), xr) - flower_[b].begin());
        if (pr % 2 == 1) {
            std::reverse(flower_[b].begin() + 1, flower_[b].end());
            return int(flower_[b].size()) - pr;
        }
        return pr;
    }

    void set_match(int u, int v) {
        match_[u] = ev_[u][v];
        if (u > n_) {
            const int xr = flower_from_[u][eu_[u][v]];
            const int pr = get_pr(u, xr);
            for (int i = 0; i < pr; ++i) set_match(flower_[u][i], flower_[u][i ^ 1]);
            set_match(xr, v);
            std::rotate(flower_[u].begin(), flower_[u].begin() + pr, flower_[u].end());
        }
    }

    void augment(int u, int v) {
        for (;;) {
            const int xnv = st_[match_[u]];
            set_match(u, v);
            if (!xnv) return;
            set_match(xnv, st_[pa_[xnv]]);
            u = st_[pa_[xnv]];
            v = xnv;
        }
    }

    int get_lca(int u, int v) {
        int& t = vis_stamp_;
        for (++t; u || v; std::swap(u, v)) {
            if (u == 0) continue;
            if (vis_[u] == t) return u;
            vis_[u] = t;
            u = st_[match_[u]];
            if (u) u = st_[pa_[u]];
        }
        return 0;
    }

    void add_blossom(int u, int lca, int v) {
        int b = n_ + 1;
        while (b <= n_x_ && st_[b]) ++b;
        if (b > n_x_) ++n_x_;
        lab_[b] = 0;
        s_[b] = 0;
        match_[b] = match_[lca];
        flower_[b].clear();
        flower_[b].push_back(lca);
        for (int x = u, y; x != lca; x = st_[pa_[y]]) {
            flower_[b].push_back(x);
            flower_[b].push_back(y = st_[match_[x]]);
            q_push(y);
        }
        std::reverse(flower_[b].begin() + 1, flower_[b].end());
        for (int x = v, y; x != lca; x = st_[pa_[y]]) {
            flower_[b].push_back(x);
            flower_[b].push_back(y = st_[match_[x]]);
            q_push(y);
        }
        set_st(b, b);
        for (int x = 1; x <= n_x_; ++x) w_[b][x] = w_[x][b] = 0;
        for (int x = 1; x <= n_; ++x) flower_from_[b][x] = 0;
        for (int xs : flower_[b]) {
            for (int x = 1; x <= n_x_; ++x)
                if (w_[b][x] == 0 || delta(xs, x) < delta(b, x)) {
                    w_[b][x] = w_[xs][x];
                    w_[x][b] = w_[x][xs];
                    eu_[b][x] = eu_[xs][x];
                    ev_[b][x] = ev_[xs][x];
                    eu_[x][b] = eu_[x][xs];
                    ev_[x][b] = ev_[x][xs];
                }
            for (int x = 1; x <= n_; ++x)
                if (flower_from_[xs][x]) flower_from_[b][x] = xs;
        }
        set_slack(b);
    }

    void expand_blossom(int b) {
        for (int y : flower_[b]) set_st(y, y);
        const int xr = flower_from_[b][eu_[b][pa_[b]]];
        const int pr = get_pr(b, xr);
        for (int i = 0; i < pr; i += 2) {
            const int xs = flower_[b][i];
            const int xns = flower_[b][i + 1];
            pa_[xs] = eu_[xns][xs];
            s_[xs] = 1;
            s_[xns] = 0;
            slack_[xs] = 0;
            set_slack(xns);
            q_push(xns);
        }
        s_[xr] = 1;
        pa_[xr] = pa_[b];
        for (size_t i = pr + 1; i < flower_[b].size(); ++i) {
            const int xs = flower_[b][i];
            s_[xs] = -1;
            set_slack(xs);
        }
        st_[b] = 0;
    }

    bool on_found_edge(int eu, int ev) {
        const int u = st_[eu], v = st_[ev];
        if (s_[v] == -1) {
            pa_[v] = eu;
            s_[v] = 1;
            const int nu = st_[match_[v]];
            slack_[v] = slack_[nu] = 0;
            s_[nu] = 0;
            q_push(nu);
        } else if (s_[v] == 0) {
            const int lca = get_lca(u, v);
            if (!lca) {
                augment(u, v);
                augment(v, u);
                return true;
            }
            add_blossom(u, lca, v);
        }
        return false;
    }

    bool matching_phase() {
        std::fill(s_.begin() + 1, s_.begin() + n_x_ + 1, -1);
        std::fill(slack_.begin() + 1, slack_.begin() + n_x_ + 1, 0);
        q_.clear();
        for (int x = 1; x <= n_x_; ++x)
            if (st_[x] == x && !match_[x]) {
                pa_[x] = 0;
                s_[x] = 0;
                q_push(x);
            }
        if (q_.empty()) return false;
        for (;;) {
            while (!q_.empty()) {
                const int u = q_.front();
                q_.pop_front();
                if (s_[st_[u]] == 1) continue;
                for (int v = 1; v <= n_; ++v)
                    if (w_[u][v] > 0 && st_[u] != st_[v]) {
                        if (delta(u, v) == 0) {
                            if (on_found_edge(u, v)) return true;
                        } else {
                            update_slack(u, st_[v]);
                        }
                    }
            }
            long long d = kInf;
            for (int b = n_ + 1; b <= n_x_; ++b)
                if (st_[b] == b && s_[b] == 1) d = std::min(d, lab_[b] / 2);
            for (int x = 1; x <= n_x_; ++x)
                if (st_[x] == x && slack_[x]) {
                    if (s_[x] == -1)
                        d = std::min(d, delta(slack_[x], x));
                    else if (s_[x] == 0)
                        d = std::min(d, delta(slack_[x], x) / 2);
                }
            for (int u = 1; u <= n_; ++u) {
                if (s_[st_[u]] == 0) {
                    if (lab_[u] <= d) return false;
                    lab_[u] -= d;
                } else if (s_[st_[u]] == 1) {
                    lab_[u] += d;
                }
            }
            for (int b = n_ + 1; b <= n_x_; ++b)
                if (st_[b] == b) {
                    if (s_[b] == 0)
                        lab_[b] += 2 * d;
                    else if (s_[b] == 1)
                        lab_[b] -= 2 * d;
                }
            q_.clear();
            for (int x = 1; x <= n_x_; ++x)
                if (st_[x] == x && slack_[x] && st_[slack_[x]] != x &&
                    delta(slack_[x], x) == 0)
                    if (on_found_edge(slack_[x], x)) return true;
            for (int b = n_ + 1; b <= n_x_; ++b)
                if (st_[b] == b && s_[b] == 1 && lab_[b] == 0) expand_blossom(b);
        }
        return false;
    }

    int n_, n_x_ = 0;
    int vis_stamp_ = 0;
    std::vector<std::vector<long long>> w_;
    // original endpoints represented by the (possibly contracted) edge (u,v)
    std::vector<std::vector<int>> eu_, ev_;
    std::vector<long long> lab_;
    std::vector<int> match_, slack_, st_, pa_, s_, vis_;
    std::vector<std::vector<int>> flower_;
    std::vector<std::vector<int>> flower_from_;
    std::deque<int> q_;
};

BlossomMatcher::BlossomMatcher(int n) : impl_(std::make_unique<Impl>(n)), n_(n) {}
BlossomMatcher::~BlossomMatcher() = default;

void BlossomMatcher::set_weight(int u, int v, long long w) {
    if (u == v || u < 0 || v < 0 || u >= n_ || v >= n_)
        throw std::invalid_argument("bad matcher edge");
    if (w <= 0) throw std::invalid_argument("matcher weights must be positive");
    impl_->set_weight(u, v, w);
}

std::vector<int> BlossomMatcher::solve_maximum() { return impl_->solve(); }

std::vector<std::pair<int, int>> minimum_weight_perfect_matching(
    int n, const std::function<long long(int, int)>& weight) {
    if (n % 2 != 0) throw std::invalid_argument("perfect matching needs an even node count");
    if (n == 0) return {};
    long long w_max = 0;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) w_max = std::max(w_max, weight(u, v));
    // maximum-weight transform with an offset that makes perfection dominate
    const long long big = (w_max + 1) * (n + 2);
    BlossomMatcher m(n);
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) m.set_weight(u, v, big - weight(u, v));
    auto mate = m.solve_maximum();
    std::vector<std::pair<int, int>> pairs;
    for (int u = 0; u < n; ++u) {
        if (mate[u] < 0) throw std::runtime_error("matching is not perfect");
        if (mate[u] > u) pairs.push_back({u, mate[u]});
    }
    if (int(pairs.size()) * 2 != n) throw std::runtime_error("matching is not perfect");
    return pairs;
}

} // namespace dqec
