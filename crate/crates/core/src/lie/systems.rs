//! Flat coframe systems and connection matrices, written as in the source
//! equations: `A ^ B` is a wedge product of linear combinations of labels.

pub const POINT_LABELS: [&str; 7] = ["theta1", "theta2", "theta3", "theta4", "Omega1", "Omega2", "Omega3"];

/// Third-order equations up to point transformations, all invariants zero.
pub const POINT_FLAT: &str = "
dtheta1 = Omega1^theta1 + theta4^theta2
dtheta2 = Omega2^theta2 + Omega3^theta1 + theta4^theta3
dtheta3 = (2*Omega2 - Omega1)^theta3 + Omega3^theta2
dtheta4 = (Omega1 - Omega2)^theta4
dOmega1 = -Omega3^theta4
dOmega2 = 0
dOmega3 = (Omega2 - Omega1)^Omega3
";

/// 5×5 conformal connection of the flat point system.
pub const POINT_CONNECTION: [[&str; 5]; 5] = [
    ["Omega2", "0", "0", "0", "0"],
    ["theta1", "Omega2 - Omega1", "-theta4", "0", "0"],
    ["theta2", "-Omega3", "0", "-theta4", "0"],
    ["theta3", "0", "-Omega3", "Omega1 - Omega2", "0"],
    ["0", "theta3", "-theta2", "theta1", "-Omega2"],
];

/// 8×8 normal conformal connection of the six-dimensional metric, flat case.
pub const POINT_NORMAL_CONNECTION: [[&str; 8]; 8] = [
    ["Omega2/2", "(Omega1 - Omega2)/4", "-theta4/4", "Omega3/4", "0", "0", "0", "0"],
    ["Omega1 - Omega2", "Omega2/2", "theta4/2", "Omega3/2", "0", "0", "0", "0"],
    ["-Omega3", "Omega3/2", "Omega1/2", "0", "0", "0", "0", "0"],
    ["theta4", "theta4/2", "0", "-Omega1/2 + Omega2", "0", "0", "0", "0"],
    ["theta2", "0", "-theta1/2", "theta3/2", "-Omega2/2", "-Omega3/2", "-theta4/2", "(Omega1 - Omega2)/4"],
    ["theta1", "theta1/2", "0", "theta2/2", "-theta4/2", "-Omega1/2", "0", "-theta4/4"],
    ["theta3", "-theta3/2", "-theta2/2", "0", "-Omega3/2", "0", "Omega1/2 - Omega2", "Omega3/4"],
    ["0", "theta2", "theta1", "theta3", "Omega1 - Omega2", "-Omega3", "theta4", "-Omega2/2"],
];

pub const G2_LABELS: [&str; 14] = [
    "theta1", "theta2", "theta3", "theta4", "theta5", "Omega1", "Omega2", "Omega3", "Omega4", "Omega5", "Omega6", "Omega7", "Omega8",
    "Omega9",
];

/// Monge equations z' = F(x, y, y', y'', z) up to contact transformations,
/// all invariants zero.
pub const G2_FLAT: &str = "
dtheta1 = theta1^(2*Omega1 + Omega4) + theta2^Omega2 + theta3^theta4
dtheta2 = theta1^Omega3 + theta2^(Omega1 + 2*Omega4) + theta3^theta5
dtheta3 = theta1^Omega5 + theta2^Omega6 + theta3^(Omega1 + Omega4) + theta4^theta5
dtheta4 = theta1^Omega7 + 4/3*theta3^Omega6 + theta4^Omega1 + theta5^Omega2
dtheta5 = theta2^Omega7 - 4/3*theta3^Omega5 + theta4^Omega3 + theta5^Omega4
dOmega1 = Omega3^Omega2 + 1/3*theta3^Omega7 - 2/3*theta4^Omega5 + 1/3*theta5^Omega6 + theta1^Omega8
dOmega2 = Omega2^(Omega1 - Omega4) - theta4^Omega6 + theta1^Omega9
dOmega3 = Omega3^(Omega4 - Omega1) - theta5^Omega5 + theta2^Omega8
dOmega4 = Omega2^Omega3 + 1/3*theta3^Omega7 + 1/3*theta4^Omega5 - 2/3*theta5^Omega6 + theta2^Omega9
dOmega5 = Omega1^Omega5 + Omega3^Omega6 - theta5^Omega7 + theta3^Omega8
dOmega6 = Omega2^Omega5 + Omega4^Omega6 + theta4^Omega7 + theta3^Omega9
dOmega7 = 4/3*Omega5^Omega6 + (Omega1 + Omega4)^Omega7 + theta4^Omega8 + theta5^Omega9
dOmega8 = Omega5^Omega7 + (2*Omega1 + Omega4)^Omega8 + Omega3^Omega9
dOmega9 = Omega6^Omega7 + (Omega1 + 2*Omega4)^Omega9 + Omega2^Omega8
";

/// 7×7 conformal connection of the (3,2) metric, flat case.
pub const G2_CONNECTION: [[&str; 7]; 7] = [
    ["-Omega1 - Omega4", "-Omega8", "-Omega9", "-Omega7/sqrt(3)", "Omega5/3", "Omega6/3", "0"],
    ["theta1", "Omega1", "Omega2", "theta4/sqrt(3)", "-theta3/3", "0", "Omega6/3"],
    ["theta2", "Omega3", "Omega4", "theta5/sqrt(3)", "0", "-theta3/3", "-Omega5/3"],
    ["2*theta3/sqrt(3)", "2*Omega5/sqrt(3)", "2*Omega6/sqrt(3)", "0", "theta5/sqrt(3)", "-theta4/sqrt(3)", "-Omega7/sqrt(3)"],
    ["theta4", "Omega7", "0", "2*Omega6/sqrt(3)", "-Omega4", "Omega2", "Omega9"],
    ["theta5", "0", "Omega7", "-2*Omega5/sqrt(3)", "Omega3", "-Omega1", "-Omega8"],
    ["0", "theta5", "-theta4", "2*theta3/sqrt(3)", "-theta2", "theta1", "Omega1 + Omega4"],
];
