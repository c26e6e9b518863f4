//! Concrete text syntax for networks (`.net`) and choreographies (`.chor`).

mod error;
mod lexer;
mod parser;
mod printer;

pub use error::{ParseError, SourceSpan};
pub use parser::{parse_choreography, parse_choreography_named, parse_network, parse_network_named, KEYWORDS};
pub use printer::{print_behaviour, print_choreography, print_network, quote_text};
