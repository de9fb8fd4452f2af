//! String newtypes for the domain vocabulary.
//!
//! Everything in an event network is named: event types, feature labels,
//! attribute names, and attribute constants. Constants are opaque atoms
//! compared by string equality; `1` and `"1"` are the same constant, `01`
//! and `1` are not.

use std::borrow::Borrow;
use std::fmt;

macro_rules! name_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                $name(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name(s)
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

name_type!(
    /// An event type: a unary predicate over events, a node of the network.
    TypeName
);
name_type!(
    /// A feature label: a unary function from events to events.
    FeatureName
);
name_type!(
    /// An attribute name: a function from events to constant values.
    AttrName
);
name_type!(
    /// An opaque attribute constant.
    ConstValue
);
