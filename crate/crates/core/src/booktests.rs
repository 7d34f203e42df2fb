// Doc-tested book chapters are registered here once the book exists.
