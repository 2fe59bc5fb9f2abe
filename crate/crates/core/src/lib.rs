pub mod eigen;
pub mod expr;
pub mod export;
pub mod jet;
pub mod oracle;
pub mod quadrature;
pub mod razavy;
pub mod roots;
pub mod series;
pub mod susy;
pub mod validator;
pub mod verify;

pub use expr::{parse, EvalError, Expression, ParseError, Params};
pub use jet::Jet;
pub use susy::{ConstructedSystem, EnergyPair, GeneratingFunction, SusyError};
