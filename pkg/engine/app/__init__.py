# hurwitz-forms engine
