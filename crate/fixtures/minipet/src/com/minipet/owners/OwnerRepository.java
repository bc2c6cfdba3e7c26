package com.minipet.owners;

public interface OwnerRepository {
    Owner findByLastName(String lastName);

    void save(Owner owner);
}
