#pragma once

#include "sald/vec2.hpp"

namespace sald {

// A static guide potential f: R^2 -> R. Guided targets are pi ∝ p exp(-c f).
class Guide {
public:
    virtual ~Guide() = default;
    virtual double value(Vec2 x) const = 0;
    virtual Vec2 grad(Vec2 x) const = 0;
};

}  // namespace sald
