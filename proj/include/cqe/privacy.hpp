#ifndef CQE_PRIVACY_HPP
#define CQE_PRIVACY_HPP

#include "cqe/entail.hpp"

namespace cqe {

enum class IndistMode { SC, IC };

// A safe-to-publish dataset: the frozen set of BCQs up to length
// max(k, MaxLenCQ(P)) that the protected instance answers positively.
// Publishing it satisfies the policy outright and preserves every
// skeptical answer on BCQs of length <= k (and intersection answers on
// unions of them).
ABox indistinguishable_abox(const CQEInstance& e, int k, IndistMode mode = IndistMode::SC,
                            const EntailBudget& b = {});

}  // namespace cqe

#endif
