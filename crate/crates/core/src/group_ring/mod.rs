//! Exact arithmetic in `Q[G]` and in the minus quotient ring.

pub mod character;
pub mod element;
pub mod minus;

pub use character::{
    all_characters, character_values, is_minus_nonzero_divisor, is_nonzero_divisor, orbit_representatives,
    Character, CharacterValue,
};
pub use element::{idempotent, norm_element, rat, restriction, GroupRingElement};
pub use minus::{minus_project, minus_project_to, MinusBasis, MinusRingElement};
