#include <cstdlib>
#include <iostream>
#include <string>

#include "embedcast/kernels.hpp"

namespace embedcast::kernels {

std::vector<const KernelSet*> available() {
    std::vector<const KernelSet*> out{&scalar()};
    if (const auto* k = avx2()) out.push_back(k);
    if (const auto* k = neon()) out.push_back(k);
    return out;
}

namespace {

const KernelSet& choose() {
    const auto sets = available();
    if (const char* forced = std::getenv("EMBEDCAST_KERNELS"); forced && *forced) {
        for (const auto* k : sets)
            if (k->name == forced) return *k;
        std::cerr << "embedcast: kernel variant '" << forced << "' unavailable, using "
                  << sets.back()->name << "\n";
    }
    return *sets.back();
}

}  // namespace

const KernelSet& active() {
    static const KernelSet& chosen = choose();
    return chosen;
}

}  // namespace embedcast::kernels
