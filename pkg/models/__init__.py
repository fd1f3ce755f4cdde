# Model families
