//! Mod-2 homology of covers of moduli of one-pointed curves, computed
//! combinatorially: enumerate one-face trivalent dessins d'enfants, decorate
//! their first homology with symplectic bases over `Z/m`, assemble the dual
//! cell complex of the decorated family, and read Betti numbers off GF(2)
//! ranks of its boundary matrices.

pub mod complex;
pub mod crossings;
pub mod cycles;
pub mod gf2;
pub mod intersection;
pub mod modm;
pub mod perm;
pub mod ribbon;
pub mod symplectic;
pub mod wiedemann;
